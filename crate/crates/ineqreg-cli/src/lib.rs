//! Implementation of the `ineqreg` command-line tool: CSV ingestion,
//! command logic, JSON report types, and the Monte Carlo study driver.
//!
//! The binary in `main.rs` is a thin argument-parsing shell over this
//! library so the end-to-end behavior is testable in-process.

// As in the library crate, `!(x > 0.0)` deliberately treats NaN as
// invalid input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod ingest;
pub mod report;
pub mod study;

/// Errors surfaced to the user, tagged with the process exit code:
/// 2 for validation problems, 3 for convergence failures.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Convergence(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Convergence(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for CliError {}

impl From<ineqreg::Error> for CliError {
    fn from(e: ineqreg::Error) -> Self {
        match e {
            ineqreg::Error::Convergence(m) => CliError::Convergence(m),
            ineqreg::Error::Validation(m) | ineqreg::Error::Numeric(m) => CliError::Validation(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
