use thiserror::Error;

/// Errors produced by the estimation and inference routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
