use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}, column `{column}`: {message}")]
    MalformedCell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("duplicate model_id `{0}`")]
    DuplicateModel(String),

    #[error("model `{model}`: {message}")]
    InvalidRecord { model: String, message: String },

    #[error("unknown field or benchmark `{0}`")]
    UnknownField(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("zero variance in benchmark `{0}`")]
    ZeroVariance(String),

    #[error("model `{model}` has no score for `{benchmark}`")]
    MissingScore { model: String, benchmark: String },

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("bootstrap discarded {discarded} of {total} resamples (limit 20%)")]
    TooManyDiscarded { discarded: usize, total: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
