use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    HeaderMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("non-binary label {value:?} at row {row}")]
    NonBinaryLabel { row: usize, value: String },

    #[error("cannot parse {value:?} as a number in column {column} at row {row}")]
    NumericParse {
        column: String,
        row: usize,
        value: String,
    },

    #[error("column mismatch: {0}")]
    ColumnMismatch(String),

    #[error("dataset has no time index")]
    MissingTimeIndex,

    #[error("split yields an empty {0} partition")]
    EmptyPartition(&'static str),

    #[error("insufficient {class} rows: need {needed}, have {available}")]
    InsufficientRows {
        class: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("no positive labels")]
    NoPositives,

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schema fingerprint mismatch: model {model}, data {data}")]
    SchemaMismatch { model: String, data: String },

    #[error("model format error at line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("requested {requested} trials but the search space has {available} configurations")]
    TooManyTrials { requested: usize, available: usize },

    #[error("no winner: trial log is empty")]
    NoWinner,

    #[error("zero pooled variance")]
    ZeroVariance,

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
