use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("truncation too small: omitted-mass bound {bound:.3e} exceeds tolerance {tolerance:.3e}")]
    TruncationTooSmall { bound: f64, tolerance: f64 },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Precision and truncation failures are reported with their own exit
    /// code by the command-line driver.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted(_) | Error::TruncationTooSmall { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
