use thiserror::Error;

pub type Result<T> = std::result::Result<T, BisrError>;

#[derive(Debug, Clone, Error)]
pub enum BisrError {
    /// Invalid argument: non-finite value, negative parameter, length mismatch.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant was violated (e.g. a bound with `p0 < 2|p1|`).
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// The penalty parameters are not covered by a convexity certificate.
    #[error("convexity certificate failed: {0}")]
    NotCertified(String),

    /// The iteration diverged; carries the objective trace up to the failure.
    #[error("algorithm failure: {message}")]
    AlgorithmFailure { message: String, trace: Vec<f64> },

    #[error("i/o error: {0}")]
    Io(String),
}

impl BisrError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        BisrError::Domain(msg.into())
    }
}

impl From<std::io::Error> for BisrError {
    fn from(e: std::io::Error) -> Self {
        BisrError::Io(e.to_string())
    }
}
