use thiserror::Error;

/// Errors produced by the fermishadow library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid occupation vector: {0}")]
    InvalidOccupation(String),

    #[error("rank {rank} out of range for subsets of size {d} of {n} modes")]
    RankOutOfRange { rank: usize, n: usize, d: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not antisymmetric (deviation {0:e})")]
    NotAntisymmetric(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("Haar sample was numerically singular twice in a row")]
    SingularSample,

    #[error("eigenvalue iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("measurement probabilities sum to {0}, expected 1")]
    ProbabilityDefect(f64),

    #[error("cannot aggregate an empty series")]
    EmptySeries,

    #[error("{batches} batches do not evenly divide {len} samples")]
    InvalidBatches { batches: usize, len: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
