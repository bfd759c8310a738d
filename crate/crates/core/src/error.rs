use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation was applied outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// An anchor pair does not realise the squared distance a gadget needs.
    #[error("anchor mismatch: expected squared distance {expected}, got {actual}")]
    AnchorMismatch { expected: String, actual: String },

    #[error("flattened size {projected} exceeds the limit of {limit} points")]
    SizeLimit { projected: BigUint, limit: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// A structurally valid document that violates an exactness invariant.
    #[error("validation error in {location}: {message}")]
    Validation { location: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn validation(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            location: location.into(),
            message: message.into(),
        }
    }
}
