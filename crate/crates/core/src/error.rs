use std::io;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at line {line}: {msg}")]
    Line { line: usize, msg: String },

    #[error("parse error at byte offset {offset}: {msg}")]
    Offset { offset: usize, msg: String },

    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),

    #[error("run validation failed for queries [{}]: {msg}", queries.join(", "))]
    RunValidation { queries: Vec<String>, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("missing signal for document `{0}`")]
    MissingSignal(String),

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn line(line: usize, msg: impl Into<String>) -> Self {
        Error::Line {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
