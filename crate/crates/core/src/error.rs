//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A required column is missing from a recording header.
    #[error("schema error: missing required column `{column}`")]
    Schema { column: String },

    /// A cell could not be parsed; rows are 1-based and count the header.
    #[error("parse error at row {row}, column `{column}`: {detail}")]
    Parse {
        row: usize,
        column: String,
        detail: String,
    },

    /// Timestamps are not strictly increasing.
    #[error("ordering error at row {row}: timestamps must be strictly increasing")]
    Ordering { row: usize },

    /// Invalid configuration or parameter value.
    #[error("config error: {0}")]
    Config(String),

    /// Mismatched tensor or batch shapes.
    #[error("shape error: {0}")]
    Shape(String),

    /// Not enough data to carry out the operation.
    #[error("insufficient data: {0}")]
    Insufficient(String),

    /// A non-finite value where a finite one is required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Zero-norm vector where a direction is required.
    #[error("zero-norm vector in {0}")]
    ZeroNorm(String),

    /// Template aggregation collapsed to (numerically) zero.
    #[error("degenerate template: {0}")]
    DegenerateTemplate(String),

    /// Evaluation protocol references data that is not present.
    #[error("protocol error: missing {}", .missing.join(", "))]
    Protocol { missing: Vec<String> },

    /// Malformed checkpoint or window store file.
    #[error("format error in {path}: {detail}")]
    Format { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
