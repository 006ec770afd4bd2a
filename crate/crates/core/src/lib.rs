//! Weighted exact-satisfiability (#XSAT) model counting.
//!
//! A clause is satisfied when exactly one of its literal occurrences is true.
//! [`count`] returns the number of such assignments using a branch-and-reduce
//! search over [`WeightedState`]s; [`oracle`] holds the brute-force reference
//! and [`analysis`] the branching-number tools.

pub mod analysis;
pub mod counter;
pub mod dimacs;
pub mod formula;
pub mod generate;
pub mod oracle;
pub mod reduce;
pub mod state;

pub use counter::{count, count_profiled, ModelCount, WeightedCount};
pub use formula::{Assignment, Clause, Formula, FormulaError, Literal};
pub use oracle::{brute_force_count, weighted_brute_force};
pub use reduce::{omega, reduce, BranchRequest, Rule};
pub use state::WeightedState;
