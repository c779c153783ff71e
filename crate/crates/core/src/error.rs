use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("expected one-dimensional input, got dimension {0}")]
    NotOneDimensional(usize),

    #[error("transport solver did not converge after {iterations} pivots (objective {objective})")]
    NonConvergence { iterations: usize, objective: f64 },

    #[error("transport problem infeasible: residual artificial mass {residual:e}")]
    Infeasible { residual: f64 },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty cell: {0}")]
    EmptyCell(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
