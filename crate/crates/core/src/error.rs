use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("size cap exceeded: n = {n} > {cap}")]
    SizeCap { n: usize, cap: usize },
    #[error("root finder stalled after {iterations} iterations (max update {max_update:e})")]
    NoConvergence {
        iterations: usize,
        max_update: f64,
        roots: Vec<Complex64>,
    },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("constraint not satisfied: {0}")]
    Constraint(String),
    #[error("eigenvector residual {residual:e} above tolerance for eigenvalue {eigenvalue}")]
    IllConditioned { eigenvalue: Complex64, residual: f64 },
    #[error("ambiguous root cluster around {center}: window {window:e} holds {inner} roots, {outer} within 10x")]
    AmbiguousCluster {
        center: Complex64,
        window: f64,
        inner: usize,
        outer: usize,
    },
    #[error("no sign change: {0}")]
    NoSignChange(String),
    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
