//! Count-preserving simplification of weighted formulas.
//!
//! [`reduce`] applies the rules of [`Rule`] in priority order, restarting
//! from the first rule after every application, until none applies. Each rule
//! leaves the weighted count of the state unchanged; rules that eliminate a
//! variable whose value varies across models fold that variable's weights
//! into the weights of the literals that determine it.
//!
//! [`omega`] is the branching primitive used by the counter: it fixes a
//! literal, a pair of literals, or an exactly-one pair, then reduces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::formula::{Clause, Formula, Literal};
use crate::state::WeightedState;

/// The reduction rules, in priority order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// `(x)`: set x true.
    UnitClause,
    /// `(x ∨ y)`: x ≡ ¬y, eliminate the variable of larger degree.
    TwoClause,
    /// `(x ∨ x ∨ C)`: x is false.
    DuplicateLiteral,
    /// `(x ∨ ¬x ∨ C)`: C is false; a bare `(x ∨ ¬x)` is dropped.
    ComplementaryPair,
    /// `(x ∨ C)`, `(y ∨ C)`: x ≡ y.
    EquivalentLiterals,
    /// `C ⊂ C′`: the literals of C′ outside C are false.
    Subsumption,
    /// `(x ∨ C₁)`, `(C₁ ∨ C₂)` with |C₁| ≥ 2: the second becomes `(¬x ∨ C₂)`.
    SharedSubclause,
    /// Two clauses sharing variables with opposite signs force the rest of
    /// their literals (or their same-sign shared literals) false.
    OpposedOverlap,
    /// Two or more singletons in one clause collapse to one weighted literal.
    SingletonGroup,
    /// Resolution on a literal occurring once, with k ≥ 1 complements.
    ResolveSingle,
    /// Resolution on a (2,2) literal.
    ResolvePair,
    /// Literals occurring together in the same k ≥ 2 clauses and nowhere
    /// else collapse to one weighted literal.
    CommonLiterals,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::UnitClause,
        Rule::TwoClause,
        Rule::DuplicateLiteral,
        Rule::ComplementaryPair,
        Rule::EquivalentLiterals,
        Rule::Subsumption,
        Rule::SharedSubclause,
        Rule::OpposedOverlap,
        Rule::SingletonGroup,
        Rule::ResolveSingle,
        Rule::ResolvePair,
        Rule::CommonLiterals,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Rule::UnitClause => "unit",
            Rule::TwoClause => "two-clause",
            Rule::DuplicateLiteral => "duplicate",
            Rule::ComplementaryPair => "complementary",
            Rule::EquivalentLiterals => "equivalent",
            Rule::Subsumption => "subsumption",
            Rule::SharedSubclause => "shared-subclause",
            Rule::OpposedOverlap => "opposed-overlap",
            Rule::SingletonGroup => "singletons",
            Rule::ResolveSingle => "resolve-single",
            Rule::ResolvePair => "resolve-pair",
            Rule::CommonLiterals => "common-literals",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One rule application, as recorded by [`reduce_traced`].
#[derive(Clone, Debug)]
pub struct RuleFiring {
    pub rule: Rule,
    pub after: WeightedState,
}

/// The argument of [`omega`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchRequest {
    /// Set one literal true.
    SingleLiteral(Literal),
    /// Set both literals true.
    LiteralPair(Literal, Literal),
    /// Exactly one of the two literals is true.
    TwoClause(Literal, Literal),
}

/// Reduces `state` to a fixpoint.
pub fn reduce(state: WeightedState) -> WeightedState {
    reduce_observed(state, |_, _| {})
}

/// Like [`reduce`], also returning every rule application in order.
pub fn reduce_traced(state: WeightedState) -> (WeightedState, Vec<RuleFiring>) {
    let mut trace = Vec::new();
    let out = reduce_observed(state, |rule, s| {
        trace.push(RuleFiring {
            rule,
            after: s.clone(),
        })
    });
    (out, trace)
}

fn reduce_observed(
    mut state: WeightedState,
    mut observe: impl FnMut(Rule, &WeightedState),
) -> WeightedState {
    while !state.is_contradiction() {
        let Some((rule, action)) = Rule::ALL
            .iter()
            .find_map(|&r| find(&state, r).map(|a| (r, a)))
        else {
            break;
        };
        state = apply(state, action);
        observe(rule, &state);
    }
    state
}

/// Applies the highest-priority applicable rule once.
pub fn reduce_step(state: &WeightedState) -> Option<(Rule, WeightedState)> {
    if state.is_contradiction() {
        return None;
    }
    Rule::ALL
        .iter()
        .find_map(|&r| find(state, r).map(|a| (r, apply(state.clone(), a))))
}

/// Applies `rule` once if it matches, ignoring the priority order.
pub fn apply_rule(state: &WeightedState, rule: Rule) -> Option<WeightedState> {
    if state.is_contradiction() {
        return None;
    }
    find(state, rule).map(|a| apply(state.clone(), a))
}

/// Every rule that currently matches.
pub fn applicable_rules(state: &WeightedState) -> Vec<Rule> {
    if state.is_contradiction() {
        return Vec::new();
    }
    Rule::ALL
        .iter()
        .copied()
        .filter(|&r| find(state, r).is_some())
        .collect()
}

/// Fixes `phi` and reduces the result.
pub fn omega(state: &WeightedState, phi: BranchRequest) -> WeightedState {
    let fixed = match phi {
        BranchRequest::SingleLiteral(l) => state.clone().assign_true(l),
        BranchRequest::LiteralPair(a, b) => state.clone().assign_all([a, b]),
        // exactly one of l, ¬l always holds; exactly one of l, l never does
        BranchRequest::TwoClause(a, b) if a == !b => state.clone(),
        BranchRequest::TwoClause(a, b) if a == b => WeightedState::zero(),
        BranchRequest::TwoClause(a, b) => state.clone().substitute(a, !b),
    };
    reduce(fixed)
}

enum Action {
    Contradiction,
    Assign(Vec<Literal>),
    Substitute {
        from: Literal,
        to: Literal,
    },
    DropTautology {
        clause: usize,
        var: u32,
    },
    Rewrite {
        clause: usize,
        replacement: Clause,
    },
    Collapse {
        group: Vec<Literal>,
    },
    Resolve {
        lit: Literal,
        plan: ResolutionWeights,
    },
}

fn find(state: &WeightedState, rule: Rule) -> Option<Action> {
    let f = state.formula();
    match rule {
        Rule::UnitClause => f
            .clauses()
            .iter()
            .find(|c| c.len() == 1)
            .map(|c| Action::Assign(vec![c.literals()[0]])),
        Rule::TwoClause => find_two_clause(f),
        Rule::DuplicateLiteral => f
            .clauses()
            .iter()
            .find_map(Clause::duplicate_literal)
            .map(|l| Action::Assign(vec![!l])),
        Rule::ComplementaryPair => find_complementary(f),
        Rule::EquivalentLiterals => find_equivalent(f),
        Rule::Subsumption => find_subsumption(f),
        Rule::SharedSubclause => find_shared_subclause(f),
        Rule::OpposedOverlap => find_opposed_overlap(f),
        Rule::SingletonGroup => find_singleton_group(f),
        Rule::ResolveSingle => find_resolution(state, false),
        Rule::ResolvePair => find_resolution(state, true),
        Rule::CommonLiterals => find_common_literals(f),
    }
}

fn apply(mut state: WeightedState, action: Action) -> WeightedState {
    match action {
        Action::Contradiction => WeightedState::zero(),
        Action::Assign(lits) => state.assign_all(lits),
        Action::Substitute { from, to } => state.substitute(from, to),
        Action::DropTautology { clause, var } => {
            let f = state.formula();
            let rest = Formula::new(
                f.clauses()
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != clause)
                    .map(|(_, c)| c.clone()),
            );
            if !rest.contains_var(var) {
                // the freed variable takes either value
                let free =
                    state.weight(Literal::positive(var)) + state.weight(Literal::negative(var));
                state.forget_var(var);
                state.scale_multiplier(&free);
            }
            state.replace_formula(rest);
            state
        }
        Action::Rewrite {
            clause,
            replacement,
        } => {
            let f = state.formula();
            let rewritten = Formula::new(f.clauses().iter().enumerate().map(|(i, c)| {
                if i == clause {
                    replacement.clone()
                } else {
                    c.clone()
                }
            }));
            state.replace_formula(rewritten);
            state
        }
        Action::Collapse { group } => {
            let rep = group[0];
            let (on, off) = merged_weights(&state, &group);
            let dropped: BTreeSet<Literal> = group[1..].iter().copied().collect();
            let f = state.formula();
            let collapsed = Formula::new(f.clauses().iter().map(|c| {
                c.literals()
                    .iter()
                    .copied()
                    .filter(|l| !dropped.contains(l))
                    .collect::<Clause>()
            }));
            for l in &group {
                state.forget_var(l.var());
            }
            state.set_weight(rep, on);
            state.set_weight(!rep, off);
            state.replace_formula(collapsed);
            state
        }
        Action::Resolve { lit, plan } => {
            let f = state.formula();
            let mut kept = Vec::new();
            let mut with_lit = Vec::new();
            let mut with_neg = Vec::new();
            for c in f.clauses() {
                if c.contains(lit) {
                    with_lit.push(remove_one(c.literals(), lit));
                } else if c.contains(!lit) {
                    with_neg.push(remove_one(c.literals(), !lit));
                } else {
                    kept.push(c.clone());
                }
            }
            for p in &with_lit {
                for q in &with_neg {
                    kept.push(p.iter().chain(q).copied().collect());
                }
            }
            state.forget_var(lit.var());
            for (l, factor) in &plan.adjust {
                state.scale_weight(*l, factor);
            }
            state.scale_by(&plan.num, &plan.den);
            state.replace_formula(Formula::new(kept));
            state
        }
    }
}

/// Weights of the representative of a group of literals of which at most
/// one is true: `(Σᵢ w(lᵢ) Πⱼ≠ᵢ w(¬lⱼ), Πᵢ w(¬lᵢ))`.
fn merged_weights(state: &WeightedState, group: &[Literal]) -> (BigUint, BigUint) {
    let off: Vec<BigUint> = group.iter().map(|&l| state.weight(!l)).collect();
    let all_off: BigUint = off.iter().product();
    let mut on = BigUint::zero();
    for (i, &l) in group.iter().enumerate() {
        let others: BigUint = off
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, w)| w)
            .product();
        on += state.weight(l) * others;
    }
    (on, all_off)
}

fn remove_one(lits: &[Literal], target: Literal) -> Vec<Literal> {
    let mut out = lits.to_vec();
    if let Some(pos) = out.iter().position(|&l| l == target) {
        out.remove(pos);
    }
    out
}

/// Multiset difference of sorted slices.
fn difference(a: &[Literal], b: &[Literal]) -> Vec<Literal> {
    let mut out = Vec::new();
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j < b.len() && b[j] == x {
            j += 1;
        } else {
            out.push(x);
        }
    }
    out
}

/// Multiset intersection of sorted slices.
fn intersection(a: &[Literal], b: &[Literal]) -> Vec<Literal> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Clauses sharing at least one variable with clause `i`, excluding `i`.
fn neighbours(f: &Formula, i: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for l in f.clauses()[i].literals() {
        for &(c, _) in f.occurrences(*l).iter().chain(f.occurrences(!*l)) {
            if c != i {
                out.insert(c);
            }
        }
    }
    out
}

/// Of two literals known to be equivalent, the one whose variable is
/// eliminated: larger degree first, then larger variable id.
fn eliminated(f: &Formula, a: Literal, b: Literal) -> (Literal, Literal) {
    if (f.degree(a.var()), a.var()) > (f.degree(b.var()), b.var()) {
        (a, b)
    } else {
        (b, a)
    }
}

fn find_two_clause(f: &Formula) -> Option<Action> {
    f.clauses().iter().find_map(|c| {
        let [a, b] = c.literals() else { return None };
        if a.var() == b.var() {
            return None;
        }
        // a ≡ ¬b
        let (gone, kept) = eliminated(f, *a, !*b);
        Some(Action::Substitute {
            from: gone,
            to: kept,
        })
    })
}

fn find_complementary(f: &Formula) -> Option<Action> {
    f.clauses().iter().enumerate().find_map(|(i, c)| {
        let x = c.complementary_pair()?;
        let rest = remove_one(&remove_one(c.literals(), x), !x);
        Some(if rest.is_empty() {
            Action::DropTautology {
                clause: i,
                var: x.var(),
            }
        } else {
            Action::Assign(rest.into_iter().map(|l| !l).collect())
        })
    })
}

fn find_equivalent(f: &Formula) -> Option<Action> {
    let cs = f.clauses();
    for i in 0..cs.len() {
        for j in neighbours(f, i).into_iter().filter(|&j| j > i) {
            let (a, b) = (cs[i].literals(), cs[j].literals());
            if a.len() != b.len() {
                continue;
            }
            let (da, db) = (difference(a, b), difference(b, a));
            if let ([x], [y]) = (da.as_slice(), db.as_slice()) {
                if x.var() != y.var() {
                    let (gone, kept) = eliminated(f, *x, *y);
                    return Some(Action::Substitute {
                        from: gone,
                        to: kept,
                    });
                }
            }
        }
    }
    None
}

fn find_subsumption(f: &Formula) -> Option<Action> {
    let cs = f.clauses();
    for i in 0..cs.len() {
        let small = cs[i].literal_set();
        for j in neighbours(f, i) {
            let big = cs[j].literal_set();
            if small.len() < big.len() && small.is_subset(&big) {
                return Some(Action::Assign(
                    big.difference(&small).map(|&l| !l).collect(),
                ));
            }
        }
    }
    None
}

fn find_shared_subclause(f: &Formula) -> Option<Action> {
    let cs = f.clauses();
    for i in 0..cs.len() {
        let a = cs[i].literals();
        if a.len() < 3 {
            continue;
        }
        for j in neighbours(f, i) {
            let b = cs[j].literals();
            let outside = difference(a, b);
            if let [x] = outside.as_slice() {
                let common = remove_one(a, *x);
                let mut replacement = difference(b, &common);
                replacement.push(!*x);
                return Some(Action::Rewrite {
                    clause: j,
                    replacement: Clause::new(replacement),
                });
            }
        }
    }
    None
}

fn find_opposed_overlap(f: &Formula) -> Option<Action> {
    let cs = f.clauses();
    for i in 0..cs.len() {
        if !cs[i].is_proper() {
            continue;
        }
        for j in neighbours(f, i).into_iter().filter(|&j| j > i) {
            if !cs[j].is_proper() {
                continue;
            }
            let (a, b) = (&cs[i], &cs[j]);
            let opposed: Vec<Literal> = a
                .literals()
                .iter()
                .copied()
                .filter(|&l| b.contains(!l))
                .collect();
            match opposed.len() {
                0 => {}
                1 => {
                    // x∨S∨A′, ¬x∨S∨B′: S must be false
                    let same = intersection(a.literals(), b.literals());
                    if !same.is_empty() {
                        return Some(Action::Assign(same.into_iter().map(|l| !l).collect()));
                    }
                }
                2 => {
                    // exactly one of the two opposed literals is true in A,
                    // which fills both clauses
                    let mut flipped: Vec<Literal> = opposed.iter().map(|&l| !l).collect();
                    flipped.sort_unstable();
                    let mut rest = difference(a.literals(), &opposed);
                    rest.extend(difference(b.literals(), &flipped));
                    if !rest.is_empty() {
                        rest.sort_unstable();
                        rest.dedup();
                        return Some(Action::Assign(rest.into_iter().map(|l| !l).collect()));
                    }
                }
                _ => return Some(Action::Contradiction),
            }
        }
    }
    None
}

fn find_singleton_group(f: &Formula) -> Option<Action> {
    f.clauses().iter().find_map(|c| {
        let group: Vec<Literal> = c
            .literals()
            .iter()
            .copied()
            .filter(|l| f.is_singleton(l.var()))
            .collect();
        (group.len() >= 2).then_some(Action::Collapse { group })
    })
}

fn find_common_literals(f: &Formula) -> Option<Action> {
    let mut groups: BTreeMap<Vec<usize>, Vec<Literal>> = BTreeMap::new();
    for var in f.vars() {
        for lit in [Literal::positive(var), Literal::negative(var)] {
            let occ = f.occurrences(lit);
            if occ.len() < 2 || f.count(!lit) > 0 {
                continue;
            }
            let clauses: Vec<usize> = occ.iter().map(|&(c, _)| c).collect();
            if clauses.windows(2).all(|w| w[0] < w[1]) {
                groups.entry(clauses).or_default().push(lit);
            }
        }
    }
    groups
        .into_values()
        .find(|g| g.len() >= 2)
        .map(|group| Action::Collapse { group })
}

fn find_resolution(state: &WeightedState, pair: bool) -> Option<Action> {
    let f = state.formula();
    for var in f.vars() {
        for lit in [Literal::positive(var), Literal::negative(var)] {
            let (pos, neg) = f.classify(lit);
            let shape = if pair {
                pos == 2 && neg == 2
            } else {
                pos == 1 && neg >= 1
            };
            if !shape {
                continue;
            }
            let Some((with_lit, with_neg)) = resolution_sides(f, lit) else {
                continue;
            };
            if let Some(plan) = resolution_weights(state, lit, &with_lit, &with_neg) {
                return Some(Action::Resolve { lit, plan });
            }
        }
    }
    None
}

/// Clause remainders on each side of a resolution.
type Sides = (Vec<Vec<Literal>>, Vec<Vec<Literal>>);

/// The remainders `C` of clauses `(lit ∨ C)` and `(¬lit ∨ C′)`, provided
/// every such clause holds exactly one occurrence of the variable.
fn resolution_sides(f: &Formula, lit: Literal) -> Option<Sides> {
    let side = |l: Literal| -> Option<Vec<Vec<Literal>>> {
        let mut out = Vec::new();
        let mut last = None;
        for &(c, _) in f.occurrences(l) {
            if last == Some(c) {
                return None;
            }
            last = Some(c);
            let clause = &f.clauses()[c];
            if clause.contains(!l) {
                return None;
            }
            out.push(remove_one(clause.literals(), l));
        }
        Some(out)
    };
    Some((side(lit)?, side(!lit)?))
}

/// How resolution on a weighted variable moves its weight onto the
/// remainder `C = c₁ ∨ … ∨ cₛ` of one of its clauses. In every model C has
/// no true literal exactly when the resolved literal is true, so the ratio
/// `w(lit) : w(¬lit)` becomes `p : q` between "C all false" and "one cᵢ
/// true". With `g = gcd(p, q)`, scaling every `w(¬cᵢ)` by `p/g` and every
/// `w(cᵢ)` by `q/g` multiplies the count by `(p/g)^(s-1) / g`, which the
/// scale undoes.
#[derive(Clone, Debug, PartialEq, Eq)]
struct ResolutionWeights {
    adjust: Vec<(Literal, BigUint)>,
    num: BigUint,
    den: BigUint,
}

fn resolution_weights(
    state: &WeightedState,
    lit: Literal,
    with_lit: &[Vec<Literal>],
    with_neg: &[Vec<Literal>],
) -> Option<ResolutionWeights> {
    let (w_on, w_off) = (state.weight(lit), state.weight(!lit));
    if w_on.is_one() && w_off.is_one() {
        return Some(ResolutionWeights {
            adjust: Vec::new(),
            num: BigUint::one(),
            den: BigUint::one(),
        });
    }
    let plan = |rest: &Vec<Literal>, p: &BigUint, q: &BigUint| {
        let distinct = rest.windows(2).all(|w| w[0].var() != w[1].var());
        if rest.is_empty() || !distinct {
            return None;
        }
        let g = p.gcd(q);
        let (p, q) = (p / &g, q / &g);
        let adjust = rest
            .iter()
            .flat_map(|&c| [(!c, p.clone()), (c, q.clone())])
            .collect();
        let den = num_traits::pow(p, rest.len() - 1);
        Some(ResolutionWeights {
            adjust,
            num: g,
            den,
        })
    };
    let on_lit = with_lit.first().and_then(|rest| plan(rest, &w_on, &w_off));
    let on_neg = with_neg.first().and_then(|rest| plan(rest, &w_off, &w_on));
    match (on_lit, on_neg) {
        (Some(a), Some(b)) if b.den < a.den => Some(b),
        (Some(a), _) => Some(a),
        (None, b) => b,
    }
}

/// A property the reducer's fixpoints are expected to have, found violated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixpointViolation {
    /// A clause of length at most 2.
    ShortClause(Clause),
    /// A clause with more than one singleton.
    SeveralSingletons(Clause),
    /// A variable with both signs that is not a (2⁺,3⁺) variable.
    LightMixedVariable {
        var: u32,
        positive: usize,
        negative: usize,
    },
    /// A clause with fewer than two variables absent from another clause.
    FewPrivateVariables(Clause, Clause),
    /// Two clauses sharing two or more literals, none of which has its
    /// variable in a third clause.
    IsolatedCommonLiterals(Clause, Clause),
}

/// Checks the shape a fully reduced formula must have: no clause shorter
/// than 3; at most one singleton per clause; mixed variables are (2⁺,3⁺);
/// any two clauses each have two variables the other lacks; and two clauses
/// sharing two or more literals have a shared literal whose variable occurs
/// in a third clause.
pub fn fixpoint_violations(f: &Formula) -> Vec<FixpointViolation> {
    let mut out = Vec::new();
    let cs = f.clauses();
    for c in cs {
        if c.len() <= 2 {
            out.push(FixpointViolation::ShortClause(c.clone()));
        }
        let singles = c
            .literals()
            .iter()
            .filter(|l| f.is_singleton(l.var()))
            .count();
        if singles > 1 {
            out.push(FixpointViolation::SeveralSingletons(c.clone()));
        }
    }
    for var in f.vars() {
        let (p, n) = f.classify(Literal::positive(var));
        if p > 0 && n > 0 && !((p >= 2 && n >= 3) || (p >= 3 && n >= 2)) {
            out.push(FixpointViolation::LightMixedVariable {
                var,
                positive: p,
                negative: n,
            });
        }
    }
    for i in 0..cs.len() {
        for j in neighbours(f, i).into_iter().filter(|&j| j > i) {
            let (va, vb) = (cs[i].vars(), cs[j].vars());
            if va.difference(&vb).count() < 2 || vb.difference(&va).count() < 2 {
                out.push(FixpointViolation::FewPrivateVariables(
                    cs[i].clone(),
                    cs[j].clone(),
                ));
            }
            let shared = intersection(cs[i].literals(), cs[j].literals());
            if shared.len() >= 2 {
                let anchored = shared.iter().any(|l| {
                    f.clauses_with_var(l.var())
                        .iter()
                        .any(|&c| c != i && c != j)
                });
                if !anchored {
                    out.push(FixpointViolation::IsolatedCommonLiterals(
                        cs[i].clone(),
                        cs[j].clone(),
                    ));
                }
            }
        }
    }
    out
}
