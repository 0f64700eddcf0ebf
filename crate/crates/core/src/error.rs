use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input violates a precondition of the operation (empty series, unsorted
    /// records, all-zero Poisson targets, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller passed mismatched shapes or lengths.
    #[error("contract error: {0}")]
    Contract(String),
    /// Prediction rows do not carry the model's feature names.
    #[error("feature names differ from the model's: missing {missing:?}, unexpected {unexpected:?}")]
    FeatureMismatch { missing: Vec<String>, unexpected: Vec<String> },
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
