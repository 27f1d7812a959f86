//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::partition::Dim;

/// Errors produced while building, scoring or searching partitions.
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor and partition (or two label vectors) disagree on a dimension size.
    #[error("dimension mismatch on {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{what} index {index} out of range (size {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    /// A precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The proposed move leaves the ICL unchanged by construction.
    #[error("no-op move on {dim:?} element {index}: {reason}")]
    NoOpMove {
        dim: Dim,
        index: usize,
        reason: &'static str,
    },

    #[error("invalid hyperparameter {name} = {value} (must be finite and > 0)")]
    InvalidHyperparameter { name: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed input; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("record {record} has timestamp {t} outside [{t_start}, {t_end})")]
    TimestampOutOfRange {
        record: usize,
        t: i64,
        t_start: i64,
        t_end: i64,
    },

    #[error("could not draw non-empty true clusters for {dim:?} after {attempts} attempts")]
    EmptyTrueCluster { dim: Dim, attempts: usize },

    #[error("non-finite ICL value encountered: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
