//! Crate-wide error type.
//!
//! Variants are grouped so callers (notably the CLI) can map them onto
//! distinct exit codes: parameter/schema validation, numerical failures,
//! and I/O.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its domain (bad config, misaligned grids, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A file did not match its documented schema.
    #[error("schema violation in {path} (row {row}, column {column}): {message}")]
    Schema {
        path: String,
        /// 1-based data row; 0 refers to the header.
        row: usize,
        column: String,
        message: String,
    },

    /// A computation could not produce a meaningful result
    /// (degenerate input, failed fit, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
