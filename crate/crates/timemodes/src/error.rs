//! Error type shared by every module of the crate.

use thiserror::Error;

/// Library error.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A computation could not reach its accuracy or convergence target.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The caller violated a structural contract (lengths, empty input, ...).
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
