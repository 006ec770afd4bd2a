//! Naive reference counters.
//!
//! These enumerate every assignment and share no code with the reducer or
//! the branching counter, so they can serve as ground truth in tests and in
//! `count --oracle-check`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::counter::{ModelCount, WeightedCount};
use crate::formula::{Assignment, Clause, Formula};
use crate::state::WeightedState;

/// Largest variable count enumerated unless the caller asks otherwise.
pub const DEFAULT_VAR_CAP: usize = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("brute force refused: {vars} variables exceeds the cap of {cap}")]
    TooManyVariables { vars: usize, cap: usize },
}

/// Counts assignments with exactly one true literal occurrence per clause.
pub fn brute_force_count(formula: &Formula) -> Result<ModelCount, OracleError> {
    brute_force_count_capped(formula, DEFAULT_VAR_CAP)
}

pub fn brute_force_count_capped(formula: &Formula, cap: usize) -> Result<ModelCount, OracleError> {
    let table = Table::new(formula, cap)?;
    let mut models: u64 = 0;
    for mask in 0..(1u64 << table.vars.len()) {
        if table.is_model(mask) {
            models += 1;
        }
    }
    Ok(ModelCount::from(BigUint::from(models)))
}

/// `(multiplier / denominator) × Σ_models Π_vars w(satisfied literal)`.
pub fn weighted_brute_force(state: &WeightedState) -> Result<WeightedCount, OracleError> {
    weighted_brute_force_capped(state, DEFAULT_VAR_CAP)
}

pub fn weighted_brute_force_capped(
    state: &WeightedState,
    cap: usize,
) -> Result<WeightedCount, OracleError> {
    if state.multiplier().is_zero() {
        return Ok(WeightedCount::zero());
    }
    let formula = state.formula();
    let table = Table::new(formula, cap)?;
    let lit_weights: Vec<[BigUint; 2]> = table
        .vars
        .iter()
        .map(|&v| {
            [
                state.weight(crate::Literal::negative(v)),
                state.weight(crate::Literal::positive(v)),
            ]
        })
        .collect();
    let mut total = BigUint::zero();
    for mask in 0..(1u64 << table.vars.len()) {
        if table.is_model(mask) {
            let mut product = BigUint::one();
            for (bit, w) in lit_weights.iter().enumerate() {
                product *= &w[((mask >> bit) & 1) as usize];
            }
            total += product;
        }
    }
    Ok(WeightedCount::from_integer(total) * state.scale())
}

/// [`weighted_brute_force`] restricted to the models accepted by `keep`.
pub fn weighted_brute_force_where<P>(
    state: &WeightedState,
    keep: P,
) -> Result<WeightedCount, OracleError>
where
    P: Fn(&Assignment) -> bool,
{
    if state.multiplier().is_zero() {
        return Ok(WeightedCount::zero());
    }
    let table = Table::new(state.formula(), DEFAULT_VAR_CAP)?;
    let mut total = BigUint::zero();
    for mask in 0..(1u64 << table.vars.len()) {
        if !table.is_model(mask) {
            continue;
        }
        let assignment: Assignment = table
            .vars
            .iter()
            .enumerate()
            .map(|(bit, &v)| (v, (mask >> bit) & 1 == 1))
            .collect();
        if keep(&assignment) {
            total += assignment
                .iter()
                .map(|(&v, &b)| state.weight(crate::Literal::new(v, b)))
                .product::<BigUint>();
        }
    }
    Ok(WeightedCount::from_integer(total) * state.scale())
}

struct Table {
    vars: Vec<u32>,
    clauses: Vec<Row>,
}

enum Row {
    /// No repeated variable: exactly-one is a popcount test.
    Masks { pos: u64, neg: u64 },
    /// Repeated variables: every occurrence is checked separately.
    Occurrences(Vec<(u32, bool)>),
}

impl Table {
    fn new(formula: &Formula, cap: usize) -> Result<Self, OracleError> {
        let mut vars: Vec<u32> = formula
            .clauses()
            .iter()
            .flat_map(|c| c.literals().iter().map(|l| l.var()))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        if vars.len() > cap || vars.len() >= 64 {
            return Err(OracleError::TooManyVariables {
                vars: vars.len(),
                cap,
            });
        }
        let bit = |v: u32| vars.binary_search(&v).expect("collected above") as u32;
        let clauses = formula
            .clauses()
            .iter()
            .map(|c: &Clause| {
                let mut seen = 0u64;
                let mut repeated = false;
                let (mut pos, mut neg) = (0u64, 0u64);
                for l in c.literals() {
                    let b = 1u64 << bit(l.var());
                    repeated |= seen & b != 0;
                    seen |= b;
                    if l.is_positive() {
                        pos |= b;
                    } else {
                        neg |= b;
                    }
                }
                if repeated {
                    Row::Occurrences(
                        c.literals()
                            .iter()
                            .map(|l| (bit(l.var()), l.is_positive()))
                            .collect(),
                    )
                } else {
                    Row::Masks { pos, neg }
                }
            })
            .collect();
        Ok(Table { vars, clauses })
    }

    fn is_model(&self, mask: u64) -> bool {
        self.clauses.iter().all(|row| match row {
            Row::Masks { pos, neg } => (mask & pos).count_ones() + (!mask & neg).count_ones() == 1,
            Row::Occurrences(occ) => {
                occ.iter()
                    .filter(|&&(b, positive)| ((mask >> b) & 1 == 1) == positive)
                    .count()
                    == 1
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Literal;

    fn f(clauses: &[&[i64]]) -> Formula {
        Formula::from_dimacs_clauses(clauses)
    }

    fn n(v: u64) -> ModelCount {
        ModelCount::from(v)
    }

    #[test]
    fn single_clause_of_three() {
        assert_eq!(brute_force_count(&f(&[&[1, 2, 3]])).unwrap(), n(3));
    }

    #[test]
    fn common_literal_example() {
        // (x∨y∨z)∧(x∨y∨r)∧(s∨¬p): x or y true with z=r=0 (2 ways), or
        // x=y=0 with z=r=1 (1 way); times 2 for (s∨¬p).
        let g = f(&[&[1, 2, 3], &[1, 2, 6], &[7, -4]]);
        assert_eq!(brute_force_count(&g).unwrap(), n(6));
    }

    #[test]
    fn duplicate_occurrences_count_separately() {
        assert_eq!(brute_force_count(&f(&[&[1, 1, 2]])).unwrap(), n(1));
        // x∨¬x always has one true occurrence, so y is false and x is free
        assert_eq!(brute_force_count(&f(&[&[1, -1, 2]])).unwrap(), n(2));
    }

    #[test]
    fn empty_formula_has_one_model() {
        assert_eq!(brute_force_count(&Formula::empty()).unwrap(), n(1));
        let g = Formula::new([Clause::default()]);
        assert_eq!(brute_force_count(&g).unwrap(), n(0));
    }

    #[test]
    fn weighted_examples() {
        let g = f(&[&[1, 2, 3], &[3, 4, 5]]);
        assert_eq!(
            weighted_brute_force(&WeightedState::new(g.clone())).unwrap(),
            WeightedCount::from_integer(brute_force_count(&g).unwrap().into_inner())
        );

        let mut s = WeightedState::new(f(&[&[1, 3]]));
        s.set_weight(Literal::positive(1), BigUint::from(2u32));
        assert_eq!(
            weighted_brute_force(&s).unwrap(),
            WeightedCount::from_integer(3u32.into())
        );

        assert!(weighted_brute_force(&WeightedState::zero())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn filtered_count_splits_on_a_literal() {
        let s = WeightedState::new(f(&[&[1, 2, 3], &[3, 4, 5]]));
        let on = weighted_brute_force_where(&s, |a| a[&3]).unwrap();
        let off = weighted_brute_force_where(&s, |a| !a[&3]).unwrap();
        assert_eq!(on, WeightedCount::from_integer(1u32.into()));
        assert_eq!(on + off, weighted_brute_force(&s).unwrap());
    }

    #[test]
    fn refuses_above_cap() {
        let g = f(&[&[1, 2, 3, 4, 5, 6]]);
        assert_eq!(
            brute_force_count_capped(&g, 5),
            Err(OracleError::TooManyVariables { vars: 6, cap: 5 })
        );
    }
}
