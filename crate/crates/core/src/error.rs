use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("phase construction failed: {0}")]
    Phase(String),
    #[error("phase verification failed: {0}")]
    PhaseCheck(String),
    #[error("amplitude construction failed: {0}")]
    Amplitude(String),
    #[error("grid too coarse: {0}")]
    Resolution(String),
    #[error("system is numerically singular (smallest singular value {sigma_min:.3e}, norm {norm:.3e})")]
    Singular { sigma_min: f64, norm: f64 },
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
    #[error("recovery failed: {0}")]
    Recovery(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
