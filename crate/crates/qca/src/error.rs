//! Error taxonomy shared by the whole crate.

use thiserror::Error;

/// Anything a construction, evolution, or conversion can reject.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or state was built from inconsistent ingredients
    /// (dimension mismatch, non-unitary matrix, improper colouring, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation was called with arguments that violate its contract
    /// (duplicate sites, arity mismatch, region not a subset, ...).
    #[error("invalid usage: {0}")]
    Usage(String),

    /// A dense construction would exceed a size cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A conversion is not defined for the given structure.
    #[error("unsupported structure: {0}")]
    Unsupported(String),
}

/// Crate-wide result alias.
pub type Result<V> = std::result::Result<V, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
