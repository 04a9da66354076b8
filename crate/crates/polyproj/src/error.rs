//! Error type shared by geometry, solvers and meta-algorithms.

use thiserror::Error;

/// Errors produced by geometry operations, inner solvers and meta-algorithms.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point index {index} out of range for cloud of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("index set must be nonempty")]
    EmptyIndices,

    #[error("index set contains duplicate index {index}")]
    DuplicateIndex { index: usize },

    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("invalid convex coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error(
        "enumeration oracle limited to at most {max_indices} indices in dimension <= {max_dim} \
         (got {indices} indices, d = {dim})"
    )]
    OracleGuard {
        indices: usize,
        dim: usize,
        max_indices: usize,
        max_dim: usize,
    },

    #[error("problem too large: {0}")]
    ProblemTooLarge(String),

    #[error("unknown solver '{0}' (expected one of: {1})")]
    UnknownSolver(String, &'static str),

    #[error("coefficient correction failed: {0}")]
    CorrectionFailure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
