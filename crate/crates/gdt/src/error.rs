//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the clustering pipeline and its tooling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample set")]
    EmptySampleSet,

    #[error("non-finite coordinate at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("empty evaluation set")]
    EmptyEvaluation,

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("bad cell at row {row}, column {col}: {reason}")]
    BadCell {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("column {0} has no present values")]
    EmptyColumn(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
