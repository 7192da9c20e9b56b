use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("inconsistent shock triple: {0}")]
    InconsistentTriple(String),
    #[error("not a valid reaction: {0}")]
    InvalidReaction(String),
    #[error("insufficient resolution: {reason} (suggested half-width L >= {suggested_l:.6e})")]
    Resolution { reason: String, suggested_l: f64 },
    #[error("no traveling wave exists: {0}")]
    ProvablyNoTws(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("numerical instability: {0}")]
    Instability(String),
    #[error("front not yet converged: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, FrontError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(FrontError::InvalidInput(msg.into()))
}

pub(crate) fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(FrontError::Unsupported(msg.into()))
}
