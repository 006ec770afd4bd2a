use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use xsat::analysis::{branching_number, verify_bounds, BranchingVector, DEFAULT_TOLERANCE};
use xsat::dimacs::{parse_dimacs, to_dimacs};
use xsat::generate::{generate, GenParams};
use xsat::oracle::{brute_force_count, DEFAULT_VAR_CAP};
use xsat::{count_profiled, Formula};

/// Largest deviation `verify-bounds` accepts.
const BOUND_TOLERANCE: f64 = 1e-3;

#[derive(Parser)]
#[command(
    name = "xsat",
    version,
    about = "Exact model counting for exactly-one CNF formulas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the models of a DIMACS file (one true literal per clause).
    Count {
        file: PathBuf,
        /// Write run statistics as key=value lines.
        #[arg(long, value_name = "PATH")]
        stats: Option<PathBuf>,
        /// Write one line per branching node.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        /// Cross-check against brute-force enumeration.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Count by brute-force enumeration.
    Oracle { file: PathBuf },
    /// Generate a random instance in DIMACS format.
    Gen {
        #[arg(long)]
        vars: u32,
        #[arg(long)]
        clauses: usize,
        #[arg(long)]
        width_min: usize,
        #[arg(long)]
        width_max: usize,
        #[arg(long)]
        monotone: bool,
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Branching number of a branch vector.
    Tau {
        #[arg(required = true, num_args = 1..)]
        entries: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Recompute the worst-case branching numbers and compare with the
    /// stated constants.
    VerifyBounds,
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct Mismatch(String);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Mismatch {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Mismatch>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn read_formula(path: &Path) -> Result<Formula> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = parse_dimacs(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(parsed.formula)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Count {
            file,
            stats,
            trace,
            oracle_check,
        } => {
            let formula = read_formula(&file)?;
            let report = count_profiled(&formula);
            if let Some(path) = stats {
                fs::write(&path, report.to_stats())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = trace {
                let mut out = String::new();
                for e in &report.events {
                    out.push_str(&e.to_string());
                    out.push('\n');
                }
                fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
            }
            if oracle_check {
                let expected = brute_force_count(&formula)
                    .with_context(|| format!("oracle check (cap {DEFAULT_VAR_CAP} variables)"))?;
                if expected != report.count {
                    return Err(Mismatch(format!(
                        "count {} disagrees with brute force {expected}",
                        report.count
                    ))
                    .into());
                }
            }
            println!("{}", report.count);
        }
        Command::Oracle { file } => {
            let formula = read_formula(&file)?;
            println!("{}", brute_force_count(&formula)?);
        }
        Command::Gen {
            vars,
            clauses,
            width_min,
            width_max,
            monotone,
            max_degree,
            seed,
            output,
        } => {
            let params = GenParams {
                vars,
                clauses,
                width_min,
                width_max,
                monotone,
                max_degree,
                seed,
            };
            let text = to_dimacs(&generate(&params)?, vars);
            match output {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
        Command::Tau { entries, tol } => {
            let v = BranchingVector::new(entries)?;
            println!("{:.6}", branching_number(&v, tol)?);
        }
        Command::VerifyBounds => {
            let report = verify_bounds();
            println!("{report}");
            if !report.all_within(BOUND_TOLERANCE) {
                bail!(Mismatch(format!(
                    "a branching number deviates by more than {BOUND_TOLERANCE}"
                )));
            }
        }
    }
    Ok(())
}
