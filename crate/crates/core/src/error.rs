use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SalError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("pole at {0}")]
    Pole(String),
    #[error("series diverges: {0}")]
    Divergent(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, SalError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SalError::InvalidArgument(msg.into()))
}
