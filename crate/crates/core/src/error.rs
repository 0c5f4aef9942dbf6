use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("site {0} is outside the window")]
    OutsideWindow(String),
    #[error("operands live on different windows")]
    WindowMismatch,
    #[error("truncation guard: {0}")]
    Truncation(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}

pub type Result<T> = std::result::Result<T, Error>;
