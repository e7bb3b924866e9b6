use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("matrix is numerically singular (detected rank {rank} of {dim})")]
    Singular { rank: usize, dim: usize },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("Jordan chain construction is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("flow generated by {which} is not bounded: {detail}")]
    NotBounded { which: String, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    /// True for errors that indicate a disagreement between two independent
    /// computations rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::Inconsistent(_) | Error::NoConvergence { .. } | Error::IllConditioned { .. }
        )
    }
}
