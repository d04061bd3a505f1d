use thiserror::Error;

/// Errors raised by grid calculus, operator evaluation and condition constants.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unsupported cube family: {0}")]
    UnsupportedFamily(String),
    #[error("empty cube family: {0}")]
    EmptyFamily(String),
    #[error("refusing evaluation: {terms:.3e} kernel terms exceed the cost cap of {cap:.3e}")]
    CostCap { terms: f64, cap: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
