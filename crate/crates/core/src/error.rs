use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("index {index} out of range (valid range {lo}..={hi})")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("wrong projector mode: {0}")]
    Mode(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty intersection detected by the Haugazeau combiner")]
    EmptyIntersection,

    #[error("proximity normaliser is zero: the reference point is feasible")]
    UndefinedNormalizer,

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
