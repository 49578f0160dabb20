use std::path::Path;

use thiserror::Error;

/// Failures surfaced to the user, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed, or inconsistent input and bad configuration.
    #[error("{0}")]
    Input(String),
    /// Data on which the statistics are undefined.
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }

    pub fn at(path: &Path, line: u64, msg: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}:{line}: {msg}", path.display()))
    }
}

impl From<kdep::Error> for CliError {
    fn from(e: kdep::Error) -> Self {
        match e {
            kdep::Error::AllSamplesIdentical | kdep::Error::DegenerateNull(_) | kdep::Error::ZeroVariance => {
                CliError::Degenerate(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
