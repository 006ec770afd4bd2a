//! The branching model counter.
//!
//! [`count`] reduces the input and then walks a chain of cases. The general
//! chain handles contradictions, the empty formula, component splitting,
//! variables with both signs and heavy occurrence, clause pairs sharing two
//! literals, and variables of degree ≥ 4; formulas of maximum degree 3 go to
//! a second chain keyed on clause lengths and singletons. Every branching
//! case splits the models of the current state into disjoint families, so
//! the count is the sum over branches. Branch children are reduced by
//! [`omega`] and re-enter the general chain.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::analysis::{profile_run, BranchEvent, BranchSink, EventLog, RunProfile};
use crate::formula::{Clause, Formula, Literal};
use crate::reduce::{applicable_rules, omega, reduce, BranchRequest};
use crate::state::WeightedState;

/// Largest clause count handled by [`mc_small`].
pub const EXHAUSTIVE_MAX_CLAUSES: usize = 4;

/// The weighted count of a state; integral for unweighted input, possibly
/// fractional for intermediate states.
pub type WeightedCount = Ratio<BigUint>;

/// An exact, non-negative number of models.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelCount(BigUint);

impl ModelCount {
    pub fn zero() -> Self {
        ModelCount(BigUint::zero())
    }

    pub fn one() -> Self {
        ModelCount(BigUint::one())
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl From<BigUint> for ModelCount {
    fn from(v: BigUint) -> Self {
        ModelCount(v)
    }
}

impl From<u64> for ModelCount {
    fn from(v: u64) -> Self {
        ModelCount(BigUint::from(v))
    }
}

impl fmt::Display for ModelCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for ModelCount {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(ModelCount)
    }
}

impl Add for ModelCount {
    type Output = ModelCount;

    fn add(self, rhs: ModelCount) -> ModelCount {
        ModelCount(self.0 + rhs.0)
    }
}

impl Mul for ModelCount {
    type Output = ModelCount;

    fn mul(self, rhs: ModelCount) -> ModelCount {
        ModelCount(self.0 * rhs.0)
    }
}

impl std::iter::Sum for ModelCount {
    fn sum<I: Iterator<Item = ModelCount>>(iter: I) -> Self {
        iter.fold(ModelCount::zero(), Add::add)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CounterError {
    #[error("exhaustive counting needs at most {EXHAUSTIVE_MAX_CLAUSES} clauses, got {0}")]
    TooManyClauses(usize),
    #[error("degree-3 counting called on an unsuitable state: {0}")]
    Precondition(String),
}

/// Which case of the counter handled a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    Contradiction,
    Empty,
    Exhaustive,
    Components,
    /// A variable with at least 2 occurrences of one sign and 3 of the other.
    MixedLiteral,
    /// Two clauses sharing two or more literals.
    SharedPair,
    /// A variable of degree ≥ 4.
    HighDegree,
    /// A 3-clause literal that also heads a 4-clause of non-singletons.
    ThreeClauseSplit,
    /// A non-singleton literal of a 3-clause.
    ThreeClause,
    /// A 4-clause without singletons.
    FourClause,
    /// A 4-clause with a singleton and a literal shared with another 4-clause.
    FourClauseLinked,
    /// A 5-clause without singletons.
    FiveClause,
    /// A 4-clause with a singleton whose other literals all sit in clauses
    /// of length ≥ 6.
    FourClauseWide,
    /// A clause of length ≥ 6.
    LongClause,
    /// A 5-clause with one singleton.
    FiveClauseSingleton,
    /// No dedicated case applied; plain binary split on a variable.
    Fallback,
}

impl Case {
    pub fn label(self) -> &'static str {
        match self {
            Case::Contradiction => "contradiction",
            Case::Empty => "empty",
            Case::Exhaustive => "exhaustive",
            Case::Components => "components",
            Case::MixedLiteral => "mixed-literal",
            Case::SharedPair => "shared-pair",
            Case::HighDegree => "high-degree",
            Case::ThreeClauseSplit => "three-clause-split",
            Case::ThreeClause => "three-clause",
            Case::FourClause => "four-clause",
            Case::FourClauseLinked => "four-clause-linked",
            Case::FiveClause => "five-clause",
            Case::FourClauseWide => "four-clause-wide",
            Case::LongClause => "long-clause",
            Case::FiveClauseSingleton => "five-clause-singleton",
            Case::Fallback => "fallback",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The two case chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chain {
    General,
    Degree3,
}

/// What the counter does with a reduced state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// Contradiction, empty formula, or exhaustive count.
    Leaf(Case),
    /// Independent parts whose counts multiply.
    Split(Vec<WeightedState>),
    /// Disjoint families of models, one per request.
    Branch(Case, Vec<BranchRequest>),
    /// Hand over to the degree-3 chain.
    Delegate,
}

/// Branching cases of the degree-3 chain, in the order they are tried.
pub const DEGREE3_CASES: [Case; 9] = [
    Case::ThreeClauseSplit,
    Case::ThreeClause,
    Case::FourClause,
    Case::FourClauseLinked,
    Case::FiveClause,
    Case::FourClauseWide,
    Case::LongClause,
    Case::FiveClauseSingleton,
    Case::Fallback,
];

/// Selects the case of `chain` that applies to the reduced `state`.
pub fn plan(state: &WeightedState, chain: Chain) -> Step {
    if state.is_contradiction() || state.formula().has_empty_clause() {
        return Step::Leaf(Case::Contradiction);
    }
    let f = state.formula();
    if f.is_empty() {
        return Step::Leaf(Case::Empty);
    }
    if chain == Chain::Degree3 && f.num_clauses() <= EXHAUSTIVE_MAX_CLAUSES {
        return Step::Leaf(Case::Exhaustive);
    }
    let parts = state.split_components();
    if parts.len() > 1 {
        return Step::Split(parts);
    }
    let order: &[Case] = match chain {
        Chain::General => &[Case::MixedLiteral, Case::SharedPair, Case::HighDegree],
        Chain::Degree3 => &[Case::SharedPair],
    };
    let cases = order.iter().chain(match chain {
        Chain::General => &[][..],
        Chain::Degree3 => &DEGREE3_CASES[..],
    });
    for &case in cases {
        if let Some(requests) = try_case(f, case) {
            return Step::Branch(case, requests);
        }
    }
    Step::Delegate
}

/// The branch requests `case` would issue on `f`, ignoring the cases that
/// precede it. `None` if the case does not match or is not a branching case.
pub fn try_case(f: &Formula, case: Case) -> Option<Vec<BranchRequest>> {
    use BranchRequest::*;
    let split_on = |x: Literal| vec![SingleLiteral(x), SingleLiteral(!x)];
    let single = |l: &Literal| f.is_singleton(l.var());
    let split = |c: &Clause| -> (Vec<Literal>, Vec<Literal>) {
        c.literals().iter().partition(|l| !single(l))
    };
    let plain = |c: &&Clause| c.literals().iter().all(|l| !single(l));
    let cs = f.clauses();
    let of_len = |k: usize| cs.iter().filter(move |c| c.len() == k && c.is_proper());
    let three_clause_literal =
        || of_len(3).find_map(|c| c.literals().iter().copied().find(|l| !single(l)));
    // the 4-clause of non-singletons that a 3-clause literal x also heads
    let wide_partner = |x: Literal| of_len(4).filter(plain).find(|c| c.contains(x));
    // a 4-clause with one singleton p, split into (others, p)
    let one_singleton = |k: usize| {
        of_len(k).filter_map(move |c| match split(c) {
            (others, singles) if singles.len() == 1 => Some((c, others, singles[0])),
            _ => None,
        })
    };

    match case {
        Case::MixedLiteral => mixed_literal(f).map(split_on),
        Case::SharedPair => shared_pair(f).map(|(x, y)| vec![TwoClause(x, y), LiteralPair(!x, !y)]),
        Case::HighDegree => f
            .vars()
            .find(|&v| f.degree(v) >= 4)
            .map(|v| split_on(Literal::positive(v))),
        Case::ThreeClauseSplit => {
            let x = three_clause_literal()?;
            let c = wide_partner(x)?;
            let rest: Vec<Literal> = c.literals().iter().copied().filter(|&l| l != x).collect();
            Some(vec![TwoClause(x, rest[0]), TwoClause(rest[1], rest[2])])
        }
        Case::ThreeClause => three_clause_literal().map(split_on),
        Case::FourClause => of_len(4).find(plain).map(|c| {
            let l = c.literals();
            vec![TwoClause(l[0], l[1]), TwoClause(l[2], l[3])]
        }),
        Case::FourClauseLinked => one_singleton(4).find_map(|(c, others, p)| {
            let z = others.iter().copied().find(|&z| {
                f.occurrences(z)
                    .iter()
                    .any(|&(j, _)| cs[j] != *c && cs[j].len() == 4)
            })?;
            let xy: Vec<Literal> = others.iter().copied().filter(|&l| l != z).collect();
            Some(vec![TwoClause(xy[0], xy[1]), TwoClause(z, p)])
        }),
        Case::FiveClause => of_len(5).find(plain).map(|c| {
            let l = c.literals();
            vec![
                TwoClause(l[0], l[1]),
                TwoClause(l[2], l[3]),
                SingleLiteral(l[4]),
            ]
        }),
        Case::FourClauseWide => one_singleton(4).find_map(|(c, others, p)| {
            let all_long = others.iter().all(|&l| {
                f.occurrences(l)
                    .iter()
                    .any(|&(j, _)| cs[j] != *c && cs[j].len() >= 6)
            });
            all_long.then(|| {
                vec![
                    SingleLiteral(others[0]),
                    SingleLiteral(others[1]),
                    TwoClause(others[2], p),
                ]
            })
        }),
        Case::LongClause => cs
            .iter()
            .filter(|c| c.len() >= 6 && c.is_proper())
            .find_map(|c| c.literals().iter().copied().find(|l| !single(l)))
            .map(split_on),
        Case::FiveClauseSingleton => one_singleton(5).next().map(|(_, others, q)| {
            vec![
                TwoClause(others[0], others[1]),
                SingleLiteral(others[2]),
                TwoClause(others[3], q),
            ]
        }),
        Case::Fallback => f.vars().next().map(|v| split_on(Literal::positive(v))),
        Case::Contradiction | Case::Empty | Case::Exhaustive | Case::Components => None,
    }
}

fn mixed_literal(f: &Formula) -> Option<Literal> {
    f.vars().find_map(|v| {
        let x = Literal::positive(v);
        match f.classify(x) {
            (p, n) if p >= 2 && n >= 3 => Some(x),
            (p, n) if p >= 3 && n >= 2 => Some(!x),
            _ => None,
        }
    })
}

/// The two highest-degree literals shared by the first pair of clauses that
/// share at least two literals.
fn shared_pair(f: &Formula) -> Option<(Literal, Literal)> {
    let cs = f.clauses();
    for i in 0..cs.len() {
        let mut seen = BTreeSet::new();
        for l in cs[i].literals() {
            for &(j, _) in f.occurrences(*l) {
                if j <= i || !seen.insert(j) {
                    continue;
                }
                let mut common: Vec<Literal> = cs[i]
                    .literal_set()
                    .intersection(&cs[j].literal_set())
                    .copied()
                    .collect();
                if common.len() >= 2 {
                    common.sort_by_key(|l| (std::cmp::Reverse(f.degree(l.var())), l.var()));
                    return Some((common[0], common[1]));
                }
            }
        }
    }
    None
}

/// Counts the models of `formula`.
pub fn count(formula: &Formula) -> ModelCount {
    Counter::new().count(formula)
}

/// A counting run together with its recursion profile.
#[derive(Clone, Debug)]
pub struct CountReport {
    pub count: ModelCount,
    pub profile: RunProfile,
    pub events: Vec<BranchEvent>,
    /// How often each non-branching case ended or split a node.
    pub leaves: BTreeMap<&'static str, u64>,
}

impl CountReport {
    /// `key=value` lines: the profile followed by leaf tallies.
    pub fn to_stats(&self) -> String {
        let mut out = self.profile.to_stats();
        for (case, n) in &self.leaves {
            out.push_str(&format!("leaf.{case}={n}\n"));
        }
        out
    }
}

/// Counts `formula` and profiles the recursion tree.
pub fn count_profiled(formula: &Formula) -> CountReport {
    let log = EventLog::new();
    let mut counter = Counter::with_sink(&log);
    let count = counter.count(formula);
    let leaves = counter.leaves.clone();
    drop(counter);
    let events = log.into_events();
    CountReport {
        count,
        profile: profile_run(events.clone()),
        events,
        leaves,
    }
}

/// Counts a reduced state of maximum degree 3 with the degree-3 chain.
pub fn count_deg3(state: &WeightedState) -> Result<WeightedCount, CounterError> {
    if state.formula().max_degree() > 3 {
        return Err(CounterError::Precondition(format!(
            "maximum degree {} exceeds 3",
            state.formula().max_degree()
        )));
    }
    let pending = applicable_rules(state);
    if !pending.is_empty() {
        return Err(CounterError::Precondition(format!(
            "state is not reduced; applicable rules: {pending:?}"
        )));
    }
    let mut counter = Counter::new();
    Ok(counter.solve(state.clone(), Chain::Degree3, 0))
}

/// Exhaustive weighted count for at most four clauses.
///
/// Enumerates one true literal occurrence per clause: the chosen literals
/// are true and every other literal of their clauses false. A choice is a
/// model when these requirements agree, and every model arises from exactly
/// one choice.
pub fn mc_small(state: &WeightedState) -> Result<WeightedCount, CounterError> {
    let m = state.formula().num_clauses();
    if m > EXHAUSTIVE_MAX_CLAUSES {
        return Err(CounterError::TooManyClauses(m));
    }
    Ok(exhaustive(state))
}

fn exhaustive(state: &WeightedState) -> WeightedCount {
    if state.is_contradiction() {
        return WeightedCount::zero();
    }
    fn go(state: &WeightedState, clause: usize, values: &mut BTreeMap<u32, bool>) -> BigUint {
        let cs = state.formula().clauses();
        if clause == cs.len() {
            return values
                .iter()
                .map(|(&v, &b)| state.weight(Literal::new(v, b)))
                .product();
        }
        let lits = cs[clause].literals();
        let mut total = BigUint::zero();
        'choice: for chosen in 0..lits.len() {
            let mut added = Vec::new();
            for (i, &l) in lits.iter().enumerate() {
                let want = if i == chosen { l } else { !l };
                match values.get(&want.var()) {
                    Some(&v) if v == want.is_positive() => {}
                    Some(_) => {
                        for v in added {
                            values.remove(&v);
                        }
                        continue 'choice;
                    }
                    None => {
                        values.insert(want.var(), want.is_positive());
                        added.push(want.var());
                    }
                }
            }
            total += go(state, clause + 1, values);
            for v in added {
                values.remove(&v);
            }
        }
        total
    }
    WeightedCount::from_integer(go(state, 0, &mut BTreeMap::new())) * state.scale()
}

/// A counting run, optionally reporting branch events to a sink.
pub struct Counter<'a> {
    sink: Option<&'a dyn BranchSink>,
    next_node: u64,
    leaves: BTreeMap<&'static str, u64>,
}

impl Default for Counter<'_> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a> Counter<'a> {
    pub fn new() -> Self {
        Counter {
            sink: None,
            next_node: 0,
            leaves: BTreeMap::new(),
        }
    }

    pub fn with_sink(sink: &'a dyn BranchSink) -> Self {
        Counter {
            sink: Some(sink),
            ..Self::new()
        }
    }

    pub fn leaf_tallies(&self) -> &BTreeMap<&'static str, u64> {
        &self.leaves
    }

    pub fn count(&mut self, formula: &Formula) -> ModelCount {
        let state = reduce(WeightedState::new(formula.clone()));
        let total = self.solve(state, Chain::General, 0);
        assert!(
            total.is_integer(),
            "unweighted count must be integral, got {total}"
        );
        ModelCount(total.to_integer())
    }

    fn solve(&mut self, state: WeightedState, chain: Chain, depth: u32) -> WeightedCount {
        match plan(&state, chain) {
            Step::Leaf(case) => {
                *self.leaves.entry(case.label()).or_default() += 1;
                match case {
                    Case::Contradiction => WeightedCount::zero(),
                    Case::Empty => state.scale(),
                    _ => exhaustive(&state),
                }
            }
            Step::Split(parts) => {
                *self.leaves.entry(Case::Components.label()).or_default() += 1;
                let mut product = state.scale();
                for part in parts {
                    if product.is_zero() {
                        break;
                    }
                    product *= self.solve(part, Chain::General, depth);
                }
                product
            }
            Step::Delegate => self.solve(state, Chain::Degree3, depth),
            Step::Branch(case, requests) => {
                let node = self.next_node;
                self.next_node += 1;
                let children: Vec<WeightedState> =
                    requests.iter().map(|&r| omega(&state, r)).collect();
                if let Some(sink) = self.sink {
                    sink.record(BranchEvent {
                        node,
                        case: case.label().to_string(),
                        parent_n: state.formula().num_vars(),
                        child_n: children.iter().map(|c| c.formula().num_vars()).collect(),
                        depth,
                    });
                }
                children
                    .into_iter()
                    .fold(WeightedCount::zero(), |acc, child| {
                        acc + self.solve(child, Chain::General, depth + 1)
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_force_count, weighted_brute_force};

    fn f(clauses: &[&[i64]]) -> Formula {
        Formula::from_dimacs_clauses(clauses)
    }

    fn n(v: u64) -> ModelCount {
        ModelCount::from(v)
    }

    fn w(v: u64) -> WeightedCount {
        WeightedCount::from_integer(BigUint::from(v))
    }

    #[test]
    fn worked_example_counts_six() {
        assert_eq!(count(&f(&[&[1, 2, 3], &[1, 2, 6], &[7, -4]])), n(6));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(count(&Formula::empty()), n(1));
        assert_eq!(count(&f(&[&[1, 2], &[-1, 2]])), n(0));
        assert_eq!(count(&f(&[&[1, 2, 3]])), n(3));
        assert_eq!(count(&Formula::new([crate::Clause::default()])), n(0));
    }

    #[test]
    fn exhaustive_small_cases() {
        let s = WeightedState::new(f(&[&[1, 2, 3], &[3, 4, 5]]));
        assert_eq!(mc_small(&s).unwrap(), w(5));
        assert_eq!(
            mc_small(&WeightedState::new(f(&[&[1, 2, 3]]))).unwrap(),
            w(3)
        );
        assert_eq!(
            mc_small(&WeightedState::new(f(&[&[1, 2], &[2, 3]]))).unwrap(),
            w(2)
        );
        let mut s = WeightedState::new(f(&[&[1, 3]]));
        s.set_weight(Literal::positive(1), BigUint::from(2u32));
        assert_eq!(mc_small(&s).unwrap(), w(3));
    }

    #[test]
    fn exhaustive_rejects_five_clauses() {
        let s = WeightedState::new(f(&[
            &[1, 2, 3],
            &[4, 5, 6],
            &[7, 8, 9],
            &[10, 11, 12],
            &[13, 14, 15],
        ]));
        assert_eq!(mc_small(&s), Err(CounterError::TooManyClauses(5)));
    }

    #[test]
    fn empty_state_returns_multiplier() {
        let s = WeightedState::with_weights(Formula::empty(), BTreeMap::new(), BigUint::from(3u32));
        assert_eq!(count_deg3(&s).unwrap(), w(3));
    }

    #[test]
    fn shared_pair_branch_matches_oracle() {
        // (a∨b∨c∨d) ∧ (a∨b∨e∨f) ∧ (c∨g∨h)
        let g = f(&[&[1, 2, 3, 4], &[1, 2, 5, 6], &[3, 7, 8]]);
        assert_eq!(count(&g), brute_force_count(&g).unwrap());
        let s = WeightedState::new(g);
        match plan(&s, Chain::Degree3) {
            Step::Leaf(Case::Exhaustive) => {}
            other => panic!("unexpected {other:?}"),
        }
        if let Step::Branch(Case::SharedPair, reqs) = plan(&s, Chain::General) {
            let split: WeightedCount = reqs
                .iter()
                .map(|&r| weighted_brute_force(&omega(&s, r)).unwrap())
                .sum();
            assert_eq!(split, weighted_brute_force(&s).unwrap());
        } else {
            panic!("expected a shared-pair branch");
        }
    }

    #[test]
    fn deg3_rejects_unreduced_state() {
        let s = WeightedState::new(f(&[&[1, 2]]));
        assert!(matches!(count_deg3(&s), Err(CounterError::Precondition(_))));
    }

    #[test]
    fn profile_counts_nodes() {
        let g = f(&[
            &[1, 2, 3],
            &[1, 4, 5],
            &[2, 6, 7],
            &[3, 8, 9],
            &[4, 6, 8],
            &[5, 7, 9],
        ]);
        let report = count_profiled(&g);
        assert_eq!(report.count, brute_force_count(&g).unwrap());
        let children: u64 = report.events.iter().map(|e| e.child_n.len() as u64).sum();
        assert_eq!(report.profile.nodes, 1 + children);
        assert!(report.profile.anomalies.is_empty());
    }
}
