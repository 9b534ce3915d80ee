use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed mask file {path}: {reason}")]
    MalformedMask { path: String, reason: String },

    #[error("mask {class_id}: empty foreground")]
    EmptyForeground { class_id: String },

    #[error("mask {class_id}: empty background")]
    EmptyBackground { class_id: String },

    #[error("mask {class_id}: {height}x{width} is below minimum size {min}x{min}")]
    MaskTooSmall {
        class_id: String,
        height: usize,
        width: usize,
        min: usize,
    },

    #[error("similarity matrix: {0}")]
    Matrix(String),

    #[error("similarity matrix is non-square: {rows} data rows, {cols} columns")]
    NonSquare { rows: usize, cols: usize },

    #[error("similarity matrix is asymmetric at ({row}, {col}): |{a} - {b}| > {tol}")]
    Asymmetric {
        row: String,
        col: String,
        a: f64,
        b: f64,
        tol: f64,
    },

    #[error("duplicate class id {0}")]
    DuplicateClass(String),

    #[error("unknown class id {0}")]
    UnknownClass(String),

    #[error("invalid option set: {0}")]
    InvalidOptionSet(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{combinations} combinations exceed the exhaustive limit of {limit}")]
    TooManyCombinations { combinations: u128, limit: u128 },

    #[error("curation: {0}")]
    Curation(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("scoring: {0}")]
    Scoring(String),

    #[error("statistics: {0}")]
    Statistics(String),

    #[error("adapter {model}: {reason}")]
    Adapter { model: String, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
