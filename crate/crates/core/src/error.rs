use thiserror::Error;

/// Errors raised across the decomposition, modeling and evaluation stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("component lengths disagree: expected {expected}, found {found}")]
    Structure { expected: usize, found: usize },
    #[error("degenerate envelope: {0}")]
    DegenerateEnvelope(String),
    #[error("undefined scale: {0}")]
    UndefinedScale(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
