//! Scenario runner: reads a JSON scenario, runs validation, certificates,
//! coefficient tables, bound verifications and weight analyses, and writes
//! a deterministic report.

// Negated comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod report;
pub mod run;
pub mod scenario;

use std::path::Path;

pub use report::{write_report, Format};
pub use run::{analyze, emit_decay_table, run_scenario, DecayRow, Options, Report};
pub use scenario::{Num, Prepared, Scenario, SpaceSpec, Tolerances, WeightSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed scenario, bad dimensions, invalid generators.
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] dobrushin::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(path: &Path, e: serde_json::Error) -> Self {
        CliError::Invalid(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
