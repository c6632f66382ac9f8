use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library. Decoder "declared errors" are ordinary
/// outcomes and never show up here.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A parameter set violates one of its invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// Codebook planning could not meet the request.
    #[error("planning error: {0}")]
    Planning(String),
    /// A computed size exceeded the configured limit.
    #[error("resource limit: {0}")]
    Resource(String),
    /// Configuration text could not be parsed or was rejected.
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
