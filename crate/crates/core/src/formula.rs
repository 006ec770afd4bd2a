//! Literals, clauses and formulas under exactly-one semantics.
//!
//! A [`Formula`] is a deduplicated, canonically ordered collection of
//! [`Clause`]s together with an occurrence index mapping every literal to the
//! `(clause, position)` pairs where it appears. Formulas are values: every
//! transformation builds a fresh formula and a fresh index.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Not;

use thiserror::Error;

/// Errors raised by structural formula operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("cannot substitute variable {0} by a literal of the same variable")]
    SelfSubstitution(u32),
    #[error("variable identifiers must be positive")]
    ZeroVariable,
}

/// A propositional variable or its negation.
///
/// Encoded as `var << 1 | negated`, so the derived ordering sorts by variable
/// first and puts the positive literal before the negative one.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(u32);

impl Literal {
    pub fn new(var: u32, positive: bool) -> Self {
        debug_assert!(var > 0, "variable ids start at 1");
        Literal(var << 1 | u32::from(!positive))
    }

    pub fn positive(var: u32) -> Self {
        Self::new(var, true)
    }

    pub fn negative(var: u32) -> Self {
        Self::new(var, false)
    }

    /// Builds a literal from a signed DIMACS integer. Returns `None` for 0.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 || value.unsigned_abs() > u64::from(u32::MAX >> 1) {
            return None;
        }
        Some(Self::new(value.unsigned_abs() as u32, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var());
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn is_complement_of(self, other: Literal) -> bool {
        self.0 ^ 1 == other.0
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(self.0 ^ 1)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "x{}", self.var())
        } else {
            write!(f, "¬x{}", self.var())
        }
    }
}

/// A clause: a multiset of literals, stored sorted.
///
/// Duplicate and complementary literals are representable; they are only
/// removed by the reduction rules.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn new(mut literals: Vec<Literal>) -> Self {
        literals.sort_unstable();
        Clause(literals)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.0.binary_search(&lit).is_ok()
    }

    /// Number of occurrences of `lit`.
    pub fn count(&self, lit: Literal) -> usize {
        self.0.iter().filter(|&&l| l == lit).count()
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.0.iter().map(|l| l.var()).collect()
    }

    pub fn literal_set(&self) -> BTreeSet<Literal> {
        self.0.iter().copied().collect()
    }

    /// First literal occurring at least twice.
    pub fn duplicate_literal(&self) -> Option<Literal> {
        self.0.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
    }

    /// First variable appearing with both polarities, as its positive literal.
    pub fn complementary_pair(&self) -> Option<Literal> {
        // sorted order places x directly before ¬x when both are present
        self.0
            .windows(2)
            .find(|w| w[0].is_complement_of(w[1]))
            .map(|w| w[0])
    }

    /// No duplicate and no complementary literals.
    pub fn is_proper(&self) -> bool {
        self.0.windows(2).all(|w| w[0].var() != w[1].var())
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l:?}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Clause::new(iter.into_iter().collect())
    }
}

/// Where a literal occurs: clause index and position within the clause.
pub type Occurrence = (usize, usize);

/// A conjunction of clauses with a maintained occurrence index.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Formula {
    clauses: Vec<Clause>,
    index: BTreeMap<Literal, Vec<Occurrence>>,
}

impl Formula {
    pub fn new<I: IntoIterator<Item = Clause>>(clauses: I) -> Self {
        let mut clauses: Vec<Clause> = clauses.into_iter().collect();
        clauses.sort_unstable();
        clauses.dedup();
        let index = build_index(&clauses);
        Formula { clauses, index }
    }

    /// Convenience constructor from signed DIMACS literals.
    ///
    /// # Panics
    /// On a zero literal.
    pub fn from_dimacs_clauses(clauses: &[&[i64]]) -> Self {
        Formula::new(clauses.iter().map(|c| {
            c.iter()
                .map(|&v| Literal::from_dimacs(v).expect("nonzero literal"))
                .collect::<Clause>()
        }))
    }

    pub fn empty() -> Self {
        Formula::default()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    /// m
    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// n
    pub fn num_vars(&self) -> usize {
        self.vars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.first().is_some_and(Clause::is_empty)
    }

    /// Distinct variables in increasing order.
    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        let mut last = 0;
        self.index.keys().filter_map(move |l| {
            if l.var() == last {
                None
            } else {
                last = l.var();
                Some(last)
            }
        })
    }

    pub fn contains_var(&self, var: u32) -> bool {
        self.index.contains_key(&Literal::positive(var))
            || self.index.contains_key(&Literal::negative(var))
    }

    pub fn occurrences(&self, lit: Literal) -> &[Occurrence] {
        self.index.get(&lit).map_or(&[], Vec::as_slice)
    }

    /// Number of occurrences of `lit` (duplicates inside a clause count).
    pub fn count(&self, lit: Literal) -> usize {
        self.occurrences(lit).len()
    }

    /// `(occurrences of lit, occurrences of ¬lit)`.
    pub fn classify(&self, lit: Literal) -> (usize, usize) {
        (self.count(lit), self.count(!lit))
    }

    /// φ(x)
    pub fn degree(&self, var: u32) -> usize {
        self.count(Literal::positive(var)) + self.count(Literal::negative(var))
    }

    /// φ(F); zero for the empty formula.
    pub fn max_degree(&self) -> usize {
        self.vars().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn is_singleton(&self, var: u32) -> bool {
        self.degree(var) == 1
    }

    /// `lit` occurs and its complement does not.
    pub fn is_monotone(&self, lit: Literal) -> bool {
        self.count(lit) > 0 && self.count(!lit) == 0
    }

    /// Indices of the distinct clauses containing `var` in either polarity.
    pub fn clauses_with_var(&self, var: u32) -> BTreeSet<usize> {
        self.occurrences(Literal::positive(var))
            .iter()
            .chain(self.occurrences(Literal::negative(var)))
            .map(|&(c, _)| c)
            .collect()
    }

    /// Total number of literal occurrences.
    pub fn size(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    /// Recomputes the occurrence index from scratch and compares it with the
    /// maintained one.
    pub fn index_is_consistent(&self) -> bool {
        build_index(&self.clauses) == self.index
    }

    /// Splits the formula along the connected components of its constraint
    /// graph. Components come out ordered by their smallest clause.
    pub fn components(&self) -> Vec<Formula> {
        let m = self.clauses.len();
        let mut dsu = DisjointSets::new(m);
        for occs in self.index.values() {
            for w in occs.windows(2) {
                dsu.union(w[0].0, w[1].0);
            }
        }
        // two polarities of the same variable join their clauses too
        for var in self.vars() {
            let pos = self.occurrences(Literal::positive(var)).first();
            let neg = self.occurrences(Literal::negative(var)).first();
            if let (Some(p), Some(n)) = (pos, neg) {
                dsu.union(p.0, n.0);
            }
        }
        let mut groups: BTreeMap<usize, Vec<Clause>> = BTreeMap::new();
        let mut root_order: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, clause) in self.clauses.iter().enumerate() {
            let root = dsu.find(i);
            let key = *root_order.entry(root).or_insert(i);
            groups.entry(key).or_default().push(clause.clone());
        }
        groups.into_values().map(Formula::new).collect()
    }

    /// Replaces every occurrence of `from` by `to` and of `¬from` by `¬to`.
    ///
    /// Identical clauses produced by the rewrite are merged; duplicate or
    /// complementary literals inside a clause are kept.
    pub fn substitute(&self, from: Literal, to: Literal) -> Result<Formula, FormulaError> {
        if from.var() == to.var() {
            return Err(FormulaError::SelfSubstitution(from.var()));
        }
        Ok(self.map_literals(|l| {
            if l == from {
                to
            } else if l == !from {
                !to
            } else {
                l
            }
        }))
    }

    pub(crate) fn map_literals(&self, f: impl Fn(Literal) -> Literal) -> Formula {
        Formula::new(
            self.clauses
                .iter()
                .map(|c| c.literals().iter().map(|&l| f(l)).collect::<Clause>()),
        )
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.clauses.iter()).finish()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "⊤");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

fn build_index(clauses: &[Clause]) -> BTreeMap<Literal, Vec<Occurrence>> {
    let mut index: BTreeMap<Literal, Vec<Occurrence>> = BTreeMap::new();
    for (ci, clause) in clauses.iter().enumerate() {
        for (pos, &lit) in clause.literals().iter().enumerate() {
            index.entry(lit).or_default().push((ci, pos));
        }
    }
    index
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A truth assignment over a set of variables.
pub type Assignment = BTreeMap<u32, bool>;

#[cfg(test)]
mod tests {
    use super::*;

    fn f(clauses: &[&[i64]]) -> Formula {
        Formula::from_dimacs_clauses(clauses)
    }

    // x=1 y=2 z=3 p=4 q=5 r=6 s=7
    #[test]
    fn literal_negation_is_an_involution() {
        for v in [1, 2, 77] {
            for pol in [true, false] {
                let l = Literal::new(v, pol);
                assert_eq!(!!l, l);
                assert!(l.is_complement_of(!l));
                assert_ne!(l, !l);
                assert_eq!(Literal::from_dimacs(l.to_dimacs()), Some(l));
            }
        }
        assert_eq!(Literal::from_dimacs(0), None);
    }

    #[test]
    fn classify_counts_both_polarities() {
        let g = f(&[&[1, 2, 3], &[-1, 4, 5]]);
        assert_eq!(g.classify(Literal::positive(1)), (1, 1));

        let g = f(&[&[1, 2, 3]]);
        assert_eq!(g.classify(Literal::positive(2)), (1, 0));
        assert!(g.is_singleton(2));
        assert!(g.is_monotone(Literal::positive(2)));

        let g = f(&[
            &[1, 2, 3],
            &[1, 4, 5],
            &[-1, 6, 7],
            &[-1, 8, 9],
            &[-1, 10, 11],
        ]);
        assert_eq!(g.classify(Literal::positive(1)), (2, 3));
        assert_eq!(g.degree(1), 5);
        assert_eq!(g.max_degree(), 5);

        assert_eq!(g.classify(Literal::positive(42)), (0, 0));
    }

    #[test]
    fn components_split_on_shared_variables() {
        assert_eq!(f(&[&[1, 2, 3], &[4, 5, 6]]).components().len(), 2);
        assert_eq!(
            f(&[&[1, 2, 3], &[3, 4, 5], &[5, 6, 7]]).components().len(),
            1
        );
        assert!(Formula::empty().components().is_empty());
        // opposite polarities still connect
        assert_eq!(f(&[&[1, 2, 3], &[-3, 4, 5]]).components().len(), 1);
    }

    #[test]
    fn substitute_rewrites_both_polarities() {
        let w = 8;
        let g = f(&[&[1, 2, 3]]);
        let h = g
            .substitute(Literal::positive(1), Literal::negative(w))
            .unwrap();
        assert_eq!(h, f(&[&[-8, 2, 3]]));

        let g = f(&[&[1, 2], &[-1, 3]]);
        let h = g
            .substitute(Literal::positive(1), Literal::positive(2))
            .unwrap();
        assert_eq!(h, f(&[&[2, 2], &[-2, 3]]));
        assert!(!h.contains_var(1));

        let g = f(&[&[1, 5, 6], &[2, 5, 6]]);
        let h = g
            .substitute(Literal::positive(1), Literal::positive(2))
            .unwrap();
        assert_eq!(h.num_clauses(), 1);
        assert_eq!(h, f(&[&[2, 5, 6]]));
    }

    #[test]
    fn substitute_onto_same_variable_is_an_error() {
        let g = f(&[&[1, 2, 3]]);
        assert_eq!(
            g.substitute(Literal::positive(1), Literal::negative(1)),
            Err(FormulaError::SelfSubstitution(1))
        );
    }

    #[test]
    fn identical_clauses_are_merged() {
        let g = f(&[&[1, 2, 3], &[3, 2, 1], &[1, 2, 3]]);
        assert_eq!(g.num_clauses(), 1);
        assert_eq!(g.num_vars(), 3);
        assert!(g.index_is_consistent());
    }

    #[test]
    fn clause_shape_queries() {
        let c: Clause = [1, 1, 2]
            .iter()
            .map(|&v| Literal::from_dimacs(v).unwrap())
            .collect();
        assert_eq!(c.duplicate_literal(), Some(Literal::positive(1)));
        assert!(!c.is_proper());
        let c: Clause = [2, -1, 1]
            .iter()
            .map(|&v| Literal::from_dimacs(v).unwrap())
            .collect();
        assert_eq!(c.complementary_pair(), Some(Literal::positive(1)));
        assert_eq!(c.duplicate_literal(), None);
    }

    #[test]
    fn empty_clause_is_detected() {
        let g = Formula::new([Clause::default(), Clause::new(vec![Literal::positive(1)])]);
        assert!(g.has_empty_clause());
        assert_eq!(g.num_clauses(), 2);
    }
}
