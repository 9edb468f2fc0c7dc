use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode count {0} outside the supported range 1..=14")]
    Size(usize),

    #[error("mode {index} out of range for a system of {modes} modes")]
    ModeIndex { index: usize, modes: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid measurement: {0}")]
    Measurement(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("integration failed at t = {time}: {reason}; try halving dt")]
    Integration { time: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
