use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A composite space would exceed the configured dense capacity.
    #[error("capacity exceeded: {what} needs {required} entries, limit is {limit}")]
    Capacity {
        what: String,
        required: u128,
        limit: usize,
    },

    /// An argument is malformed (wrong dimension, non-Hermitian, not orthonormal, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A construction could not produce an object satisfying its invariants.
    #[error("construction failed: {0}")]
    Construction(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
