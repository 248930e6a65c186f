use thiserror::Error;

/// Errors raised by the lab's operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty region")]
    EmptyRegion,
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("outside grid: {0}")]
    OutsideGrid(String),
    #[error("hypotheses fail: {0}")]
    Hypothesis(String),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("solver diverged at iteration {iterations} (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },
    #[error("{0}")]
    Unsupported(String),
    #[error("io: {0}")]
    Io(String),
    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::InvalidParameter(msg.into()))
}
