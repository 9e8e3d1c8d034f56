//! Command implementations behind the `docksim` binary. Each command writes
//! plot-ready CSV or JSON and returns a [`CliError`] that maps onto the
//! process exit code.

pub mod commands;
pub mod scenario;

use docksim::ValidationReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("invalid scenario:\n{0}")]
    Invalid(ValidationReport),

    #[error("{0}")]
    Diverged(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for bad input, 2 when the run diverged.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Diverged(_) => 2,
            _ => 1,
        }
    }
}

impl From<docksim::Error> for CliError {
    fn from(e: docksim::Error) -> Self {
        match e {
            docksim::Error::Diverged { .. } | docksim::Error::NonFinite { .. } => CliError::Diverged(e.to_string()),
            docksim::Error::Invalid(report) => CliError::Invalid(report),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Nine significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{:.8e}", x + 0.0)
}
