//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's preconditions.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An input was outside a function's numeric domain (NaN, infinity, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed (non-positive-definite factorization,
    /// NaN loss, ...). Never silently ignored.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A serialized artifact was malformed or had the wrong magic/CRC.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
