//! Batch front end: one request per invocation, a deterministic report
//! written atomically, and an exit code that classifies the outcome.

mod commands;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::indexes::SearchStrategy;
use crate::vectors::{parse_scalar, NormKind, Scalar};

pub use report::{certificate_checks, Check, OracleReport, Report, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Command {
    Delta,
    Extract,
    Refine,
    Tree,
    Series,
    Extreme,
    OneSided,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Exhaustive,
    Greedy,
    Beam,
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "symdex", version, about = "Certified symmetrization indexes and c0-extraction procedures")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Input JSON: a set, a series, or (for `oracle`) a report.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Witness count, step count or `N_max`, depending on the command.
    #[arg(long)]
    pub n: Option<usize>,
    /// Rational `p/q` or decimal literal.
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub strategy: StrategyName,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sign-pattern budget for convex maximizations.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Adds rounded display columns to CSV output.
    #[arg(long)]
    pub decimal: Option<usize>,
    /// Overrides the norm given in the input.
    #[arg(long)]
    pub norm: Option<String>,
}

impl Args {
    fn epsilon(&self, default: &str) -> Result<Scalar, Error> {
        let raw = self.epsilon.as_deref().unwrap_or(default);
        let e = parse_scalar(raw).map_err(Error::invalid)?;
        if e <= Scalar::from_integer(0.into()) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        Ok(e)
    }

    fn norm_override(&self) -> Result<Option<NormKind>, Error> {
        self.norm.as_deref().map(|s| s.parse().map_err(Error::invalid)).transpose()
    }

    fn search(&self, pool: Option<Vec<crate::vectors::SparseVec>>) -> SearchStrategy {
        let s = match self.strategy {
            StrategyName::Exhaustive => SearchStrategy::exhaustive(),
            StrategyName::Greedy => SearchStrategy::greedy(2),
            StrategyName::Beam => SearchStrategy::beam(4),
        };
        match pool {
            Some(p) => s.with_pool(p),
            None => s,
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::WitnessNotMember { .. } => EXIT_INVALID,
        Error::DepthExceeded { .. } | Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::InvariantViolation(_) => EXIT_INVARIANT,
        _ => EXIT_INVALID,
    }
}

/// What a run wrote and how it should exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub code: i32,
    pub message: String,
}

/// Runs one request: reads the input, writes the report, and returns the
/// exit code together with a one-line summary.
pub fn run(args: &Args) -> RunSummary {
    match commands::execute(args) {
        Ok((body, code, message)) => match write_atomic(&args.output, body.as_bytes()) {
            Ok(()) => RunSummary { code, message },
            Err(e) => RunSummary {
                code: EXIT_INVALID,
                message: format!("cannot write {}: {e}", args.output.display()),
            },
        },
        Err(e) => RunSummary {
            code: exit_code(&e),
            message: e.to_string(),
        },
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
