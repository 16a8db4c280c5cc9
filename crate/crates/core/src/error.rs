use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} exceeds tolerance {tolerance:e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite: eigenvalue {min_eigenvalue:e} <= floor {floor:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, floor: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("support of {size} atoms exceeds the limit of {limit}")]
    SupportTooLarge { size: usize, limit: usize },

    #[error("characteristic-function integral needs one-dimensional marginals (p={p}, q={q})")]
    DimensionNotOne { p: usize, q: usize },

    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("basis model has no basis functions")]
    EmptyBasis,

    #[error("sample has {found} grid values, model grid has {expected}")]
    GridMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("number of permutation replicates must be at least 1")]
    BadReplicateCount,
}

pub type Result<T> = std::result::Result<T, Error>;
