use std::path::PathBuf;

use sqzhd::analysis::{AnalysisError, FitError};
use sqzhd::gaussian::GaussianError;
use sqzhd::signal::SignalError;
use sqzhd::wdm::WdmError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io { .. } | CliError::Output(_) => EXIT_IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<GaussianError> for CliError {
    fn from(e: GaussianError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<WdmError> for CliError {
    fn from(e: WdmError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SignalError> for CliError {
    fn from(e: SignalError) -> Self {
        match e {
            SignalError::Io(err) => CliError::Output(err.to_string()),
            SignalError::Csv(err) => CliError::Output(err.to_string()),
            SignalError::Chain(err) => err.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::NonConvergence { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Numeric(m) => CliError::Numeric(m),
            AnalysisError::Fit(f) => f.into(),
            AnalysisError::Signal(s) => s.into(),
            AnalysisError::Gaussian(g) => g.into(),
            AnalysisError::Io(err) => CliError::Output(err.to_string()),
            AnalysisError::Csv(err) => CliError::Output(err.to_string()),
            AnalysisError::Json(err) => CliError::Output(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
