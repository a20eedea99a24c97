//! File formats, command-line front end and parallel orchestration for
//! [`stlb_core`].

pub mod cli;
pub mod input;
pub mod output;
pub mod parallel;
pub mod trend;

use stlb_core::Error;

/// Failure of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, files or parameters; exit code 2.
    #[error("input error: {0}")]
    Input(String),
    /// A computation could not be certified; exit code 3.
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::Parameter(_)
            | Error::InvalidForms
            | Error::NotNormalizable(_)
            | Error::Unsupported(_)
            | Error::UnsupportedPotential(_) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
