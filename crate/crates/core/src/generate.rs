//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{Clause, Formula, Literal};
use crate::state::WeightedState;

/// Attempts per clause before the generator gives up on a degree cap.
const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("width range [{min}, {max}] is invalid")]
    BadWidth { min: usize, max: usize },
    #[error("clause width {width} exceeds the {vars} available variables")]
    TooFewVariables { width: usize, vars: u32 },
    #[error("{clauses} clauses of width ≥ {width} need {needed} occurrences, but {vars} variables of degree ≤ {cap} allow {allowed}")]
    DegreeCapInfeasible {
        clauses: usize,
        width: usize,
        needed: usize,
        vars: u32,
        cap: usize,
        allowed: usize,
    },
    #[error("could not place clause {index} within the degree cap")]
    Stuck { index: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub vars: u32,
    pub clauses: usize,
    pub width_min: usize,
    pub width_max: usize,
    pub monotone: bool,
    pub max_degree: Option<usize>,
    pub seed: u64,
}

/// Draws a formula: each clause takes a uniform width, distinct variables
/// and (unless monotone) fair-coin polarities. With a degree cap, variables
/// already at the cap are excluded from later draws. Repeated clauses are
/// redrawn, so the result has exactly `clauses` clauses.
pub fn generate(p: &GenParams) -> Result<Formula, GenerateError> {
    if p.width_min == 0 || p.width_min > p.width_max {
        return Err(GenerateError::BadWidth {
            min: p.width_min,
            max: p.width_max,
        });
    }
    if p.width_max > p.vars as usize {
        return Err(GenerateError::TooFewVariables {
            width: p.width_max,
            vars: p.vars,
        });
    }
    if let Some(cap) = p.max_degree {
        let needed = p.clauses * p.width_min;
        let allowed = p.vars as usize * cap;
        if needed > allowed {
            return Err(GenerateError::DegreeCapInfeasible {
                clauses: p.clauses,
                width: p.width_min,
                needed,
                vars: p.vars,
                cap,
                allowed,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut degree = vec![0usize; p.vars as usize + 1];
    let mut clauses: Vec<Clause> = Vec::with_capacity(p.clauses);
    for index in 0..p.clauses {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let width = rng.gen_range(p.width_min..=p.width_max);
            let pool: Vec<u32> = (1..=p.vars)
                .filter(|&v| p.max_degree.is_none_or(|cap| degree[v as usize] < cap))
                .collect();
            if pool.len() < width {
                continue;
            }
            let clause: Clause = pool
                .choose_multiple(&mut rng, width)
                .map(|&v| Literal::new(v, p.monotone || rng.gen_bool(0.5)))
                .collect();
            if clauses.contains(&clause) {
                continue;
            }
            for l in clause.literals() {
                degree[l.var() as usize] += 1;
            }
            clauses.push(clause);
            placed = true;
            break;
        }
        if !placed {
            return Err(GenerateError::Stuck { index });
        }
    }
    Ok(Formula::new(clauses))
}

/// Parameters for small weighted states used to exercise the reducer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateParams {
    pub max_vars: u32,
    pub max_clauses: usize,
    pub max_width: usize,
    /// Allow a variable to occur more than once in a clause.
    pub repeats: bool,
    /// Weights are drawn uniformly from this list.
    pub weights: Vec<u32>,
}

impl Default for StateParams {
    fn default() -> Self {
        StateParams {
            max_vars: 14,
            max_clauses: 8,
            max_width: 5,
            repeats: true,
            weights: vec![1, 2, 3],
        }
    }
}

/// A random weighted state. Shapes vary with the seed: the variable and
/// clause counts, clause widths and polarity bias are all drawn, which
/// makes rarely-firing reduction rules reachable by sampling.
pub fn random_state(p: &StateParams, seed: u64) -> WeightedState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = rng.gen_range(2..=p.max_vars.max(2));
    let clauses = rng.gen_range(1..=p.max_clauses.max(1));
    let negative = [0.0, 0.25, 0.5][rng.gen_range(0..3)];
    let all: Vec<u32> = (1..=vars).collect();
    let mut out = Vec::with_capacity(clauses);
    for _ in 0..clauses {
        let width = rng.gen_range(1..=p.max_width.max(1));
        let picked: Vec<u32> = if p.repeats && rng.gen_bool(0.2) {
            (0..width).map(|_| rng.gen_range(1..=vars)).collect()
        } else {
            all.choose_multiple(&mut rng, width.min(all.len()))
                .copied()
                .collect()
        };
        out.push(
            picked
                .into_iter()
                .map(|v| Literal::new(v, !rng.gen_bool(negative)))
                .collect::<Clause>(),
        );
    }
    let mut state = WeightedState::new(Formula::new(out));
    let live: Vec<u32> = state.formula().vars().collect();
    if !p.weights.is_empty() {
        for v in live {
            for lit in [Literal::positive(v), Literal::negative(v)] {
                let w = p.weights[rng.gen_range(0..p.weights.len())];
                state.set_weight(lit, w.into());
            }
        }
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimacs::to_dimacs;

    fn params(seed: u64) -> GenParams {
        GenParams {
            vars: 10,
            clauses: 6,
            width_min: 3,
            width_max: 5,
            monotone: false,
            max_degree: None,
            seed,
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = to_dimacs(&generate(&params(7)).unwrap(), 10);
        let b = to_dimacs(&generate(&params(7)).unwrap(), 10);
        assert_eq!(a, b);
        assert_ne!(a, to_dimacs(&generate(&params(8)).unwrap(), 10));
    }

    #[test]
    fn shape_is_respected() {
        let f = generate(&params(3)).unwrap();
        assert_eq!(f.num_clauses(), 6);
        assert!(f
            .clauses()
            .iter()
            .all(|c| (3..=5).contains(&c.len()) && c.is_proper()));
    }

    #[test]
    fn monotone_has_no_negations() {
        let f = generate(&GenParams {
            monotone: true,
            ..params(1)
        })
        .unwrap();
        assert!(f
            .clauses()
            .iter()
            .flat_map(|c| c.literals())
            .all(|l| l.is_positive()));
    }

    #[test]
    fn degree_cap_holds() {
        let p = GenParams {
            vars: 20,
            clauses: 15,
            width_min: 3,
            width_max: 4,
            max_degree: Some(3),
            ..params(11)
        };
        let f = generate(&p).unwrap();
        assert!(f.max_degree() <= 3);
    }

    #[test]
    fn random_states_are_reproducible() {
        let p = StateParams::default();
        assert_eq!(random_state(&p, 5), random_state(&p, 5));
        let s = random_state(&p, 9);
        assert!(s.formula().num_vars() <= 14);
        assert!(s.weights().values().all(|w| *w <= 3u32.into()));
    }

    #[test]
    fn infeasible_parameters() {
        let p = GenParams {
            clauses: 20,
            max_degree: Some(2),
            ..params(1)
        };
        assert!(matches!(
            generate(&p),
            Err(GenerateError::DegreeCapInfeasible { .. })
        ));
        let p = GenParams {
            width_min: 0,
            ..params(1)
        };
        assert!(matches!(generate(&p), Err(GenerateError::BadWidth { .. })));
        let p = GenParams {
            width_max: 11,
            ..params(1)
        };
        assert!(matches!(
            generate(&p),
            Err(GenerateError::TooFewVariables { .. })
        ));
    }
}
