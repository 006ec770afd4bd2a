//! Branching numbers and recursion-tree profiles.
//!
//! For a branching vector `(r₁,…,r_k)` the characteristic function is
//! `h(x) = 1 − Σ x^(−rᵢ)`; its root above 1 is the branching number λ, and a
//! search tree whose nodes all have branching number at most λ has `O(λⁿ)`
//! leaves.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use thiserror::Error;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("a branching vector needs at least one entry")]
    EmptyVector,
    #[error("branching vector entries must be positive")]
    NonPositiveEntry,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("malformed trace line {line:?}: {reason}")]
    MalformedTrace { line: String, reason: String },
}

/// Per-branch decreases in the number of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchingVector(Vec<u32>);

impl BranchingVector {
    pub fn new(entries: Vec<u32>) -> Result<Self, AnalysisError> {
        if entries.is_empty() {
            return Err(AnalysisError::EmptyVector);
        }
        if entries.contains(&0) {
            return Err(AnalysisError::NonPositiveEntry);
        }
        Ok(BranchingVector(entries))
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `h(x) = 1 − Σ x^(−rᵢ)`
    pub fn characteristic(&self, x: f64) -> f64 {
        1.0 - self.0.iter().map(|&r| x.powi(-(r as i32))).sum::<f64>()
    }
}

impl fmt::Display for BranchingVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// The root λ > 1 of the characteristic function, by bisection.
///
/// `h` increases strictly on `(1, ∞)`, is negative just above 1 when the
/// vector has two or more entries, and is non-negative at `k^(1/min rᵢ)`.
/// A single-entry vector has branching number 1.
pub fn branching_number(v: &BranchingVector, tol: f64) -> Result<f64, AnalysisError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(AnalysisError::BadTolerance(tol));
    }
    let k = v.0.len();
    if k == 1 {
        return Ok(1.0);
    }
    let min = *v.0.iter().min().expect("non-empty") as f64;
    let mut lo = 1.0 + 1e-12;
    let mut hi = (k as f64).powf(1.0 / min) + 1.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let h = v.characteristic(mid);
        if h.abs() <= tol && hi - lo <= tol {
            return Ok(mid);
        }
        if h < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Convenience wrapper over plain entries with the default tolerance.
pub fn lambda(entries: &[u32]) -> Result<f64, AnalysisError> {
    branching_number(&BranchingVector::new(entries.to_vec())?, DEFAULT_TOLERANCE)
}

/// A worst-case recurrence of the counter with its published constant.
#[derive(Clone, Debug)]
pub struct BoundRow {
    pub case: &'static str,
    pub vector: Vec<u32>,
    pub stated: f64,
    pub computed: f64,
}

impl BoundRow {
    pub fn deviation(&self) -> f64 {
        (self.computed - self.stated).abs()
    }
}

#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub rows: Vec<BoundRow>,
}

impl BoundsReport {
    pub fn max_computed(&self) -> f64 {
        self.rows.iter().map(|r| r.computed).fold(1.0, f64::max)
    }

    pub fn all_within(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.deviation() <= tol)
    }
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<24} {:<10} {:>8} {:>10} {:>10}",
            "case", "vector", "stated", "computed", "deviation"
        )?;
        for r in &self.rows {
            let v = BranchingVector(r.vector.clone()).to_string();
            writeln!(
                f,
                "{:<24} {:<10} {:>8.4} {:>10.6} {:>10.2e}",
                r.case,
                v,
                r.stated,
                r.computed,
                r.deviation()
            )?;
        }
        write!(f, "max {:.6}", self.max_computed())
    }
}

/// The recurrences behind the counter's worst-case running time, each with
/// the constant it is claimed to solve to.
pub const BOUND_TABLE: [(&str, &[u32], f64); 7] = [
    ("shared-pair", &[7, 2], 1.1908),
    ("four-clause", &[4, 4], 1.1892),
    ("five-clause", &[9, 5, 5], 1.1995),
    ("four-clause-wide", &[9, 9, 3], 1.1925),
    ("long-clause", &[10, 1], 1.1975),
    ("mixed-literal", &[7, 5], 1.1238),
    ("high-degree", &[13, 1], 1.1632),
];

pub fn verify_bounds() -> BoundsReport {
    let rows = BOUND_TABLE
        .iter()
        .map(|&(case, vector, stated)| BoundRow {
            case,
            vector: vector.to_vec(),
            stated,
            computed: lambda(vector).expect("table vectors are valid"),
        })
        .collect();
    BoundsReport { rows }
}

/// One branching node of a counting run.
///
/// Serialized as
/// `node=<id> case=<label> parent_n=<int> child_n=<int,int,...> depth=<int>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchEvent {
    pub node: u64,
    pub case: String,
    pub parent_n: usize,
    pub child_n: Vec<usize>,
    pub depth: u32,
}

impl BranchEvent {
    /// `parent_n − child_n` per branch; negative values indicate a bug.
    pub fn reductions(&self) -> Vec<i64> {
        self.child_n
            .iter()
            .map(|&c| self.parent_n as i64 - c as i64)
            .collect()
    }
}

impl fmt::Display for BranchEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node={} case={} parent_n={} child_n=",
            self.node, self.case, self.parent_n
        )?;
        for (i, c) in self.child_n.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " depth={}", self.depth)
    }
}

impl FromStr for BranchEvent {
    type Err = AnalysisError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| AnalysisError::MalformedTrace {
            line: line.to_string(),
            reason: reason.to_string(),
        };
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for token in line.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| bad("expected key=value"))?;
            fields.insert(k, v);
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| bad(&format!("missing {k}")))
        };
        let node = get("node")?
            .parse()
            .map_err(|_| bad("node is not an integer"))?;
        let case = get("case")?.to_string();
        let parent_n = get("parent_n")?
            .parse()
            .map_err(|_| bad("parent_n is not an integer"))?;
        let child_n = get("child_n")?
            .split(',')
            .map(|s| s.parse().map_err(|_| bad("child_n is not an integer list")))
            .collect::<Result<Vec<usize>, _>>()?;
        let depth = match fields.get("depth") {
            Some(d) => d.parse().map_err(|_| bad("depth is not an integer"))?,
            None => 0,
        };
        Ok(BranchEvent {
            node,
            case,
            parent_n,
            child_n,
            depth,
        })
    }
}

/// Receives branch events from a counting run. Implementations must accept
/// events from several threads.
pub trait BranchSink: Sync {
    fn record(&self, event: BranchEvent);
}

/// Collects events in memory.
#[derive(Default)]
pub struct EventLog {
    events: Mutex<Vec<BranchEvent>>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_events(self) -> Vec<BranchEvent> {
        let mut events = self.events.into_inner().unwrap_or_else(|e| e.into_inner());
        events.sort_by_key(|e| e.node);
        events
    }
}

impl BranchSink for EventLog {
    fn record(&self, event: BranchEvent) {
        self.events
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(event);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchRecord {
    pub node: u64,
    pub case: String,
    pub reductions: Vec<i64>,
    pub lambda: Option<f64>,
}

/// Aggregate shape of a recursion tree.
#[derive(Clone, Debug, PartialEq)]
pub struct RunProfile {
    pub nodes: u64,
    pub max_depth: u32,
    pub tallies: BTreeMap<String, u64>,
    pub records: Vec<BranchRecord>,
    /// Largest branching number over all nodes; 1 for a tree with no
    /// branching.
    pub max_lambda: f64,
    /// Nodes with a non-positive variable reduction.
    pub anomalies: Vec<u64>,
}

impl Default for RunProfile {
    fn default() -> Self {
        RunProfile {
            nodes: 1,
            max_depth: 0,
            tallies: BTreeMap::new(),
            records: Vec::new(),
            max_lambda: 1.0,
            anomalies: Vec::new(),
        }
    }
}

impl RunProfile {
    /// `key=value` lines for a stats file.
    pub fn to_stats(&self) -> String {
        let mut out = format!(
            "nodes={}\nmax_depth={}\nmax_lambda={:.6}\nanomalies={}\n",
            self.nodes,
            self.max_depth,
            self.max_lambda,
            self.anomalies.len()
        );
        for (case, n) in &self.tallies {
            out.push_str(&format!("case.{case}={n}\n"));
        }
        out
    }

    /// Worst branching vector seen, with its node.
    pub fn worst(&self) -> Option<&BranchRecord> {
        self.records
            .iter()
            .filter(|r| r.lambda.is_some())
            .max_by(|a, b| a.lambda.partial_cmp(&b.lambda).expect("finite"))
    }
}

/// Aggregates branch events. The result does not depend on event order.
pub fn profile_run<I: IntoIterator<Item = BranchEvent>>(events: I) -> RunProfile {
    let mut events: Vec<BranchEvent> = events.into_iter().collect();
    events.sort_by(|a, b| a.node.cmp(&b.node).then_with(|| a.case.cmp(&b.case)));
    let mut profile = RunProfile::default();
    for e in events {
        profile.nodes += e.child_n.len() as u64;
        profile.max_depth = profile.max_depth.max(e.depth + 1);
        *profile.tallies.entry(e.case.clone()).or_default() += 1;
        let reductions = e.reductions();
        let lambda = if reductions.iter().all(|&r| r >= 1) {
            let v = BranchingVector::new(reductions.iter().map(|&r| r as u32).collect());
            v.ok()
                .and_then(|v| branching_number(&v, DEFAULT_TOLERANCE).ok())
        } else {
            profile.anomalies.push(e.node);
            None
        };
        if let Some(l) = lambda {
            profile.max_lambda = profile.max_lambda.max(l);
        }
        profile.records.push(BranchRecord {
            node: e.node,
            case: e.case,
            reductions,
            lambda,
        });
    }
    profile
}
