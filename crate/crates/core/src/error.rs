use thiserror::Error;

/// Errors raised by the sieve library.
///
/// Variants carry owned strings so that results can be cached and shared
/// between workers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {check} (prime {prime:?})")]
    Validation { check: String, prime: Option<u64> },

    #[error("level {0} is not supported: {1}")]
    UnsupportedLevel(u64, String),

    #[error("prime {ell} is unusable: {reason}")]
    UnusablePrime { ell: u64, reason: String },

    #[error("combinatorial explosion: {0}")]
    CombinatorialExplosion(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
