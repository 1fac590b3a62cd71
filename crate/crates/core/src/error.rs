use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid geometry, index, or mismatched operands.
    #[error("domain error: {0}")]
    Domain(String),
    /// A benchmark or model configuration violates a precondition.
    #[error("configuration error: {0}")]
    Config(String),
    /// Allocation or other resource failure.
    #[error("resource error: {0}")]
    Resource(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
