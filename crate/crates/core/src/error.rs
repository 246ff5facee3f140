use thiserror::Error;

/// Errors raised by tensor, kernel and decomposition routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode {mode} out of range for a tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),

    #[error("reference tensor has zero norm")]
    ZeroReference,

    #[error("invalid rank: {0}")]
    InvalidRank(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is rank deficient or ill-conditioned (condition estimate {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
