use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlepianError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("dense guard exceeded: n = {n} > {guard}")]
    GuardExceeded { n: usize, guard: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, SlepianError>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(SlepianError::DimensionMismatch { expected, got })
    }
}

pub(crate) fn check_bandwidth(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 && w < 0.5 {
        Ok(())
    } else {
        Err(SlepianError::InvalidParameter(format!(
            "half-bandwidth must lie in (0, 1/2), got {w}"
        )))
    }
}

pub(crate) fn check_tolerance(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(SlepianError::InvalidParameter(format!(
            "tolerance must lie in (0, 1/2), got {eps}"
        )))
    }
}
