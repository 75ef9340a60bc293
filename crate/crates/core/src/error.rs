use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or experiment parameter violates one of its invariants.
    #[error("invalid value for `{key}`: {constraint}")]
    InvalidParameter { key: String, constraint: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// The population exceeded its individual cap before the requested time.
    #[error("forest truncated at time {at} (individual cap reached)")]
    Truncated { at: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter { key: key.into(), constraint: constraint.into() }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
