use thiserror::Error;

use crate::scalar::ParseScalarError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid frame context: {0}")]
    InvalidContext(String),

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("coframe dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expected {expected} endomorphisms, got {got}")]
    EndomorphismCount { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("operation requires n = {required}, got n = {got}")]
    UnsupportedDimension { required: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("not a unit vector: {0}")]
    NotUnit(String),

    #[error("metric is not positive definite at {0:?}")]
    NotPositiveDefinite(Vec<f64>),

    #[error("ambient sectional curvature k is required for this residual")]
    MissingCurvature,

    #[error("root {0} is irrational; use a floating point scalar")]
    IrrationalRoot(String),

    #[error("malformed curvature JSON: {0}")]
    Json(String),

    #[error(transparent)]
    Parse(#[from] ParseScalarError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
