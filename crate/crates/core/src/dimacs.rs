//! DIMACS CNF input and output, read under exactly-one semantics.

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Clause, Formula, Literal};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: malformed header: {reason}")]
    BadHeader { line: usize, reason: String },
    #[error("line {line}: duplicate header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: clause data before the header")]
    MissingHeader { line: usize },
    #[error("line {line}: invalid literal {token:?}")]
    BadLiteral { line: usize, token: String },
    #[error("line {line}: variable {var} exceeds the declared {declared}")]
    VariableOutOfRange {
        line: usize,
        var: u32,
        declared: u32,
    },
    #[error("input ends inside a clause (missing terminating 0)")]
    UnterminatedClause,
    #[error("input is not valid UTF-8")]
    Encoding,
}

/// A parsed file: the formula plus any header mismatches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parsed {
    pub formula: Formula,
    pub declared_vars: u32,
    pub declared_clauses: usize,
    pub warnings: Vec<String>,
}

/// Parses DIMACS CNF. A header is optional only for input with no clauses.
pub fn parse_dimacs(input: &[u8]) -> Result<Parsed, DimacsError> {
    let text = std::str::from_utf8(input).map_err(|_| DimacsError::Encoding)?;
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut max_var = 0u32;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            // end marker used by some benchmark sets
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::DuplicateHeader { line });
            }
            header = Some(parse_header(trimmed, line)?);
            continue;
        }
        let Some((declared, _)) = header else {
            return Err(DimacsError::MissingHeader { line });
        };
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DimacsError::BadLiteral {
                line,
                token: token.to_string(),
            })?;
            if value == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
                continue;
            }
            let lit = Literal::from_dimacs(value).ok_or_else(|| DimacsError::BadLiteral {
                line,
                token: token.to_string(),
            })?;
            if lit.var() > declared {
                return Err(DimacsError::VariableOutOfRange {
                    line,
                    var: lit.var(),
                    declared,
                });
            }
            max_var = max_var.max(lit.var());
            current.push(lit);
        }
    }
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }

    let (declared_vars, declared_clauses) = header.unwrap_or((0, 0));
    let mut warnings = Vec::new();
    if declared_clauses != clauses.len() {
        warnings.push(format!(
            "header declares {declared_clauses} clauses, found {}",
            clauses.len()
        ));
    }
    if max_var < declared_vars {
        warnings.push(format!(
            "header declares {declared_vars} variables, highest used is {max_var}"
        ));
    }
    Ok(Parsed {
        formula: Formula::new(clauses),
        declared_vars,
        declared_clauses,
        warnings,
    })
}

fn parse_header(line_text: &str, line: usize) -> Result<(u32, usize), DimacsError> {
    let bad = |reason: &str| DimacsError::BadHeader {
        line,
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line_text.split_whitespace().collect();
    match fields[..] {
        ["p", "cnf", n, m] => {
            let n = n
                .parse()
                .map_err(|_| bad("variable count is not a number"))?;
            let m = m.parse().map_err(|_| bad("clause count is not a number"))?;
            Ok((n, m))
        }
        ["p", format, ..] if format != "cnf" => Err(bad("format must be cnf")),
        _ => Err(bad("expected `p cnf <vars> <clauses>`")),
    }
}

/// Writes `formula` as DIMACS CNF with `vars` declared variables (at least
/// the highest variable used).
pub fn to_dimacs(formula: &Formula, vars: u32) -> String {
    let highest = formula.vars().max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", vars.max(highest), formula.num_clauses());
    for clause in formula.clauses() {
        for l in clause.literals() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
