use thiserror::Error;

use crate::terms::UnifyError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("interest sets differ: {left} vs {right}")]
    InterestMismatch { left: String, right: String },

    #[error(transparent)]
    Unify(#[from] UnifyError),

    #[error("{vars} variables exceed the reference enumeration cap of {cap}")]
    TooLarge { vars: usize, cap: usize },

    #[error("group {0} is not in the abstract match result")]
    NotInMatch(String),

    #[error("predicate mismatch: {0}")]
    PredicateMismatch(String),

    #[error("fixpoint not reached after {0} iterations")]
    FixpointLimitExceeded(usize),

    #[error("bottom argument: {0}")]
    Bottom(String),

    #[error("invalid renaming: {0}")]
    Renaming(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}
