//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by configuration validation, signal processing and the
/// experiment engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("bit string length {got} does not match the budget of {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("combined symbol index {0} does not fit the per-chip bit budget")]
    IndexOverflow(u128),

    #[error("hop code vector contains duplicate entries")]
    DuplicateHop,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("channel matrix is ill-conditioned")]
    IllConditioned,

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(f64, f64),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("value outside domain: {0}")]
    DomainError(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("bad flag: {0}")]
    BadFlag(String),

    #[error("bad config: {0}")]
    BadConfig(String),

    #[error("io failure: {0}")]
    IoFailure(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code the CLI maps this error to: 2 for configuration problems,
    /// 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConstraintViolation(_) | Error::BadFlag(_) | Error::BadConfig(_) => 2,
            _ => 3,
        }
    }
}
