use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs, unwritable output paths.
    #[error("{0}")]
    Usage(String),

    /// A property suite ran to completion and at least one property failed.
    #[error("{0}")]
    SuiteFailed(String),

    /// The computation itself failed (integration blow-up).
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SuiteFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<fermicorr::error::Error> for CliError {
    fn from(e: fermicorr::error::Error) -> Self {
        match e {
            fermicorr::error::Error::Integration { .. } => CliError::Numerical(e.to_string()),
            // every other library error is a rejected input
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
