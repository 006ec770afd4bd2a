//! Weighted formulas.
//!
//! A [`WeightedState`] stands for the quantity
//!
//! ```text
//! WC = (multiplier / denominator) × Σ_{exact models A} Π_{v ∈ Var(F)} w(literal of v made true by A)
//! ```
//!
//! Every reduction and branching step in this crate maps states to states
//! (or to families of states) without changing that quantity. Weights default
//! to 1 and only non-unit weights are stored. The denominator stays 1 except
//! after resolution on a variable whose two weights do not divide each other.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::formula::{Clause, Formula, Literal};

#[derive(Clone, PartialEq, Eq)]
pub struct WeightedState {
    formula: Formula,
    weights: BTreeMap<Literal, BigUint>,
    multiplier: BigUint,
    denominator: BigUint,
}

impl WeightedState {
    /// Unit weights, multiplier 1. An empty clause yields the zero state.
    pub fn new(formula: Formula) -> Self {
        Self::with_weights(formula, BTreeMap::new(), BigUint::one())
    }

    pub fn with_weights(
        formula: Formula,
        weights: BTreeMap<Literal, BigUint>,
        multiplier: BigUint,
    ) -> Self {
        if multiplier.is_zero() || formula.has_empty_clause() {
            return Self::zero();
        }
        let mut state = WeightedState {
            formula,
            weights: BTreeMap::new(),
            multiplier,
            denominator: BigUint::one(),
        };
        for (lit, w) in weights {
            if state.formula.contains_var(lit.var()) {
                state.set_weight(lit, w);
            }
        }
        state
    }

    /// The contradiction state: no formula, multiplier 0.
    pub fn zero() -> Self {
        WeightedState {
            formula: Formula::empty(),
            weights: BTreeMap::new(),
            multiplier: BigUint::zero(),
            denominator: BigUint::one(),
        }
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn multiplier(&self) -> &BigUint {
        &self.multiplier
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    /// `multiplier / denominator`.
    pub fn scale(&self) -> Ratio<BigUint> {
        Ratio::new(self.multiplier.clone(), self.denominator.clone())
    }

    /// Stored (non-unit) weights.
    pub fn weights(&self) -> &BTreeMap<Literal, BigUint> {
        &self.weights
    }

    pub fn weight(&self, lit: Literal) -> BigUint {
        self.weights.get(&lit).cloned().unwrap_or_else(BigUint::one)
    }

    pub fn has_unit_weights(&self, var: u32) -> bool {
        !self.weights.contains_key(&Literal::positive(var))
            && !self.weights.contains_key(&Literal::negative(var))
    }

    /// Sets `w(lit)`.
    ///
    /// # Panics
    /// If `w` is zero; weights are positive.
    pub fn set_weight(&mut self, lit: Literal, w: BigUint) {
        assert!(!w.is_zero(), "literal weights are positive");
        if w.is_one() {
            self.weights.remove(&lit);
        } else {
            self.weights.insert(lit, w);
        }
    }

    pub(crate) fn scale_weight(&mut self, lit: Literal, factor: &BigUint) {
        if !factor.is_one() {
            let w = self.weight(lit) * factor;
            self.set_weight(lit, w);
        }
    }

    pub(crate) fn scale_multiplier(&mut self, factor: &BigUint) {
        self.multiplier *= factor;
        if self.multiplier.is_zero() {
            *self = Self::zero();
        }
    }

    /// Multiplies the scale by `num / den`, keeping it in lowest terms.
    pub(crate) fn scale_by(&mut self, num: &BigUint, den: &BigUint) {
        self.multiplier *= num;
        self.denominator *= den;
        let g = self.multiplier.gcd(&self.denominator);
        if self.multiplier.is_zero() {
            *self = Self::zero();
        } else if !g.is_one() {
            self.multiplier /= &g;
            self.denominator /= &g;
        }
    }

    pub(crate) fn forget_var(&mut self, var: u32) {
        self.weights.remove(&Literal::positive(var));
        self.weights.remove(&Literal::negative(var));
    }

    pub fn is_contradiction(&self) -> bool {
        self.multiplier.is_zero()
    }

    /// Formula, stored weights, multiplier and denominator.
    pub fn into_parts(self) -> (Formula, BTreeMap<Literal, BigUint>, BigUint, BigUint) {
        (
            self.formula,
            self.weights,
            self.multiplier,
            self.denominator,
        )
    }

    pub(crate) fn replace_formula(&mut self, formula: Formula) {
        if formula.has_empty_clause() {
            *self = Self::zero();
            return;
        }
        let gone: Vec<u32> = self
            .weights
            .keys()
            .map(|l| l.var())
            .filter(|&v| !formula.contains_var(v))
            .collect();
        debug_assert!(gone.is_empty(), "weighted variables vanished: {gone:?}");
        self.formula = formula;
    }

    /// Sets `lit` true and propagates the exactly-one consequences: every
    /// other literal of a clause containing a true literal becomes false, and
    /// false literals are deleted. Unit clauses are left for the reducer.
    pub fn assign_true(self, lit: Literal) -> Self {
        self.assign_all([lit])
    }

    /// Sets every literal in `lits` true at once, then propagates.
    pub fn assign_all<I: IntoIterator<Item = Literal>>(mut self, lits: I) -> Self {
        if self.is_contradiction() {
            return self;
        }
        let mut value: BTreeMap<u32, bool> = BTreeMap::new();
        let mut queue: Vec<Literal> = lits.into_iter().collect();
        let mut clauses: Vec<Clause> = self.formula.clauses().to_vec();
        loop {
            while let Some(l) = queue.pop() {
                match value.get(&l.var()) {
                    Some(&v) if v == l.is_positive() => {}
                    Some(_) => return Self::zero(),
                    None => {
                        value.insert(l.var(), l.is_positive());
                    }
                }
            }
            let mut next = Vec::with_capacity(clauses.len());
            for clause in &clauses {
                let mut trues = 0;
                let mut rest = Vec::new();
                for &l in clause.literals() {
                    match value.get(&l.var()) {
                        Some(&v) if v == l.is_positive() => trues += 1,
                        Some(_) => {}
                        None => rest.push(l),
                    }
                }
                match trues {
                    0 if rest.is_empty() => return Self::zero(),
                    0 => next.push(Clause::new(rest)),
                    1 => queue.extend(rest.into_iter().map(|l| !l)),
                    _ => return Self::zero(),
                }
            }
            clauses = next;
            if queue.is_empty() {
                break;
            }
        }
        let mut factor = BigUint::one();
        for (&var, &val) in &value {
            factor *= self.weight(Literal::new(var, val));
            self.forget_var(var);
        }
        self.multiplier *= factor;
        self.formula = Formula::new(clauses);
        self
    }

    /// Eliminates `from`'s variable through the equivalence `from ≡ to`.
    ///
    /// The weight of `from` moves onto `to`: `w(to) ×= w(from)` and
    /// `w(¬to) ×= w(¬from)`.
    ///
    /// # Panics
    /// If both literals share a variable.
    pub fn substitute(mut self, from: Literal, to: Literal) -> Self {
        if self.is_contradiction() {
            return self;
        }
        let formula = self
            .formula
            .substitute(from, to)
            .expect("substitution between distinct variables");
        let (wf, wnf) = (self.weight(from), self.weight(!from));
        self.forget_var(from.var());
        self.scale_weight(to, &wf);
        self.scale_weight(!to, &wnf);
        self.formula = formula;
        self
    }

    /// One state per connected component; the scale stays with `self` and
    /// every part starts from scale 1.
    pub fn split_components(&self) -> Vec<WeightedState> {
        self.formula
            .components()
            .into_iter()
            .map(|part| {
                let vars: BTreeSet<u32> = part.vars().collect();
                let weights = self
                    .weights
                    .iter()
                    .filter(|(l, _)| vars.contains(&l.var()))
                    .map(|(l, w)| (*l, w.clone()))
                    .collect();
                WeightedState {
                    formula: part,
                    weights,
                    multiplier: BigUint::one(),
                    denominator: BigUint::one(),
                }
            })
            .collect()
    }
}

impl fmt::Debug for WeightedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.multiplier)?;
        if !self.denominator.is_one() {
            write!(f, "/{}", self.denominator)?;
        }
        write!(f, " × {:?}", self.formula)?;
        if !self.weights.is_empty() {
            write!(f, " w{{")?;
            for (i, (l, w)) in self.weights.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{l:?}:{w}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(clauses: &[&[i64]]) -> Formula {
        Formula::from_dimacs_clauses(clauses)
    }

    fn lit(v: i64) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    // x=1 y=2 z=3 p=4 q=5
    #[test]
    fn assign_removes_clause_and_falsifies_neighbours() {
        let s = WeightedState::new(f(&[&[1, 2, 3], &[3, 4, 5]])).assign_true(lit(1));
        assert_eq!(s.formula(), &f(&[&[4, 5]]));
        assert_eq!(s.multiplier(), &BigUint::one());
    }

    #[test]
    fn assign_detects_forced_conflict() {
        let s = WeightedState::new(f(&[&[1, 2], &[1, -2]])).assign_true(lit(1));
        assert!(s.is_contradiction());
        assert!(s.formula().is_empty());
    }

    #[test]
    fn assign_collects_literal_weight() {
        let mut s = WeightedState::new(f(&[&[1, 3]]));
        s.set_weight(lit(1), BigUint::from(2u32));
        let s = s.assign_true(lit(1));
        assert!(s.formula().is_empty());
        assert_eq!(s.multiplier(), &BigUint::from(2u32));
        assert!(s.weights().is_empty());
    }

    #[test]
    fn assign_two_true_in_one_clause_is_contradiction() {
        let s = WeightedState::new(f(&[&[1, 2, 3]])).assign_all([lit(1), lit(2)]);
        assert!(s.is_contradiction());
    }

    #[test]
    fn assign_all_false_clause_is_contradiction() {
        let s = WeightedState::new(f(&[&[1, 2], &[-1, 3]])).assign_all([lit(-2), lit(3)]);
        // x2 false, x3 true -> clause 2 satisfied so x1 must be true, clause 1 fine
        assert!(!s.is_contradiction());
        let s = WeightedState::new(f(&[&[1, 2]])).assign_all([lit(-1), lit(-2)]);
        assert!(s.is_contradiction());
    }

    #[test]
    fn substitute_moves_weights() {
        let mut s = WeightedState::new(f(&[&[1, 2, 3], &[-1, 4, 5]]));
        s.set_weight(lit(1), BigUint::from(3u32));
        s.set_weight(lit(-1), BigUint::from(5u32));
        s.set_weight(lit(-2), BigUint::from(2u32));
        let s = s.substitute(lit(1), lit(-2));
        assert_eq!(s.weight(lit(-2)), BigUint::from(6u32));
        assert_eq!(s.weight(lit(2)), BigUint::from(5u32));
        assert!(!s.formula().contains_var(1));
    }
}
