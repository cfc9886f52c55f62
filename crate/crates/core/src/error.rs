use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the data, model, evaluation, and interpretation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },

    #[error("non-numeric value {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("response not binary: value {value} at row {row}")]
    ResponseNotBinary { row: usize, value: f64 },

    #[error("invalid value {value} at row {row}, column {column}: {reason}")]
    InvalidValue {
        row: usize,
        column: String,
        value: f64,
        reason: String,
    },

    #[error("unknown feature {0:?}")]
    UnknownFeature(String),

    #[error("empty dataset requested")]
    EmptyDataset,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("constant column {0:?}")]
    ConstantColumn(String),

    #[error("row {row} has more than one active current-mode indicator")]
    AmbiguousMode { row: usize },

    #[error("row length {got} does not match the model's {expected} features")]
    LengthMismatch { expected: usize, got: usize },

    #[error("no instances satisfy condition")]
    EmptySelection,

    #[error("training failed: {0}")]
    Training(String),

    #[error("unsupported model document version {0}")]
    ModelVersion(u32),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
