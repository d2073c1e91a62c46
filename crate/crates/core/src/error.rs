use thiserror::Error;

/// Errors raised by the numerical toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument fell outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A request exceeded a hard size cap (dense materialization, etc.).
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A sparse-structure slot that does not exist for the given row.
    #[error("invalid slot: {0}")]
    Slot(String),
    /// An internal self-check failed; indicates a bug, not bad input.
    #[error("internal consistency violation: {0}")]
    Internal(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn slot(msg: impl Into<String>) -> Self {
        Error::Slot(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
