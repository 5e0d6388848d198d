use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a documented precondition.
    #[error("usage: {0}")]
    Usage(String),

    #[error("bitstring length {got} does not match vertex count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("graph generation failed: {rejections} consecutive rejections placing point {placed} of {n}")]
    GenerationFailed {
        n: usize,
        placed: usize,
        rejections: usize,
    },

    #[error("independent-set basis exceeds {limit} states")]
    BasisTooLarge { limit: usize },

    #[error("integrator failure at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("all probability mass lies outside the independent sets")]
    DegenerateDistribution,

    #[error("fit failed: {0}")]
    Fit(String),

    /// A time budget cannot accommodate the requested work.
    #[error("budget: {0}")]
    Budget(String),

    #[error("exact solve exceeded its deadline")]
    Timeout,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
