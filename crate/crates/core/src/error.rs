use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error(
        "exponential enumeration refused: p = {p} exceeds the guard p_max = {guard} \
         (2^(p-1) compositions)"
    )]
    EnumerationGuard { p: usize, guard: usize },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("singular covariance estimate: smallest eigenvalue {0:e}")]
    Singular(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver failure at iteration {iteration}: {reason}")]
    Solver { iteration: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
