use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Input violates a domain invariant.
    #[error("validation failed: {0}")]
    Validation(String),

    /// An operation was called in the wrong order (e.g. backward before forward).
    #[error("invalid state: {0}")]
    State(String),

    /// A computation produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Stable machine-greppable code used as the CLI error prefix.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "E_DIMENSION",
            Error::Validation(_) => "E_VALIDATION",
            Error::State(_) => "E_STATE",
            Error::Numeric(_) => "E_NUMERIC",
            Error::Parse(_) => "E_PARSE",
            Error::Io(_) => "E_IO",
        }
    }

    /// Process exit status for this error: 3 validation-class, 4 numeric, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension(_) | Error::Validation(_) | Error::Parse(_) | Error::State(_) => 3,
            Error::Numeric(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Parse(e.to_string())
        }
    }
}
