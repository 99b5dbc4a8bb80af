use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::special::SpecialFnError;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("solver failure: {0}")]
    Solver(String),
    /// Schema violation in a configuration document; `pointer` is a JSON
    /// pointer to the offending value.
    #[error("config error at `{pointer}`: {message}")]
    Config { pointer: String, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Special(SpecialFnError::Domain(_))
                | Error::Parse(_)
                | Error::Invalid(_) | Error::OutOfRange(_) | Error::Config { .. } | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
