use thiserror::Error;

/// Errors raised across the covariance toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension too small: need p >= {required}, got {actual}")]
    DimensionTooSmall { required: usize, actual: usize },

    #[error("matrix is not symmetric at ({i}, {j}): {upper} vs {lower}")]
    Asymmetric {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
    },

    #[error("non-finite entry at ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("observation matrix contains missing entries")]
    MissingData,

    #[error("too few samples: need at least {required}, got {actual}")]
    TooFewSamples { required: usize, actual: usize },

    #[error("columns {i} and {j} share fewer than 2 jointly present rows")]
    InsufficientOverlap { i: usize, j: usize },

    #[error("sparsity exponent q must lie in [0, 1), got {0}")]
    InvalidQ(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate ladder: {0}")]
    LadderDegenerate(String),

    #[error("parse error in {source_name} at line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// True for failures of the numerics on otherwise valid input
    /// (non-PD matrices, solver non-convergence).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite(_) | Error::NoConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
