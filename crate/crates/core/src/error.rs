//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("universe size mismatch: {left} vs {right}")]
    UniverseMismatch { left: usize, right: usize },

    #[error("vertex {vertex} out of range (universe size {universe})")]
    VertexOutOfRange { vertex: usize, universe: usize },

    #[error("level {level} out of range for uniformity {k}")]
    LevelOutOfRange { level: usize, k: usize },

    #[error("subset relation violated: {0}")]
    NotASubset(String),

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("target family is empty")]
    EmptyFamily,

    #[error("infeasible exposure schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("constants ledger inconsistent: {0}")]
    LedgerInconsistency(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
