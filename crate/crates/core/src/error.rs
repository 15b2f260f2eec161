use thiserror::Error;

/// Errors produced by the estimators, the benchmark oracles and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("threshold {y_star} is not aligned with a bin edge of [{a}, {b}] with {m} bins; adjust a, b or m so that (y* - a) / delta is an integer")]
    MisalignedThreshold { y_star: f64, a: f64, b: f64, m: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("chain state violates the target domain: {0}")]
    OutOfDomain(String),

    #[error("no in-domain starting point found after {attempts} prior draws")]
    Initialization { attempts: usize },

    #[error("all bin counts are zero; the update carries no information")]
    NoCounts,

    #[error("subset simulation level {level}: no sample exceeds threshold {threshold}")]
    DegenerateLevel { level: usize, threshold: f64 },

    #[error("{method} did not converge within {limit} stages")]
    NonConvergence { method: &'static str, limit: usize, partial_estimate: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("requested probability is beyond the estimate's resolution; smallest resolvable tail mass is {smallest:e}")]
    Resolution { smallest: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
