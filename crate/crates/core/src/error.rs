use thiserror::Error;

use crate::network::ValidationReport;

/// Errors raised by the finite-field layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("prime {0} is too large (must be below 65536)")]
    PrimeTooLarge(u32),
    #[error("entry {value} is out of field range for p = {prime}")]
    EntryOutOfRange { value: u32, prime: u32 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
}

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
    #[error("network is not layered: {0}")]
    NotLayered(String),
    #[error("operation requires the {expected} model")]
    Model { expected: &'static str },
    #[error("{what} = {value} exceeds the limit {limit}")]
    Limit {
        what: &'static str,
        value: u128,
        limit: u128,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("document error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn limit(
        what: &'static str,
        value: impl Into<u128>,
        limit: impl Into<u128>,
    ) -> Self {
        Error::Limit {
            what,
            value: value.into(),
            limit: limit.into(),
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
