use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("negative coordinate {value} at index {index}")]
    NegativeCoordinate { index: usize, value: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("empty sample list")]
    EmptySamples,

    #[error("infeasible sample for period {t}, agent {i}: g = {value}")]
    InfeasibleSample { t: usize, i: usize, value: f64 },

    #[error("LP backend failure: {0}")]
    Lp(String),

    #[error("equilibrium computation failed: {0}")]
    Equilibrium(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
