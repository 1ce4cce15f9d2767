use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid size {0} must be a power of two and at least 8")]
    BadGridSize(usize),

    #[error("field contains a non-finite value at index {0}")]
    NonFinite(usize),

    #[error("turning point of the canonical orbit not found for x <= {limit} (q = {q}, alpha = {alpha})")]
    TurningPointNotFound { q: f64, alpha: f64, limit: f64 },

    #[error("ode integration failed: {0}")]
    Integration(String),

    #[error("singular or ill-conditioned linear system: {0}")]
    SingularMatrix(String),

    #[error("newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no bracketing partner found: {0}")]
    NoBracket(String),

    #[error("timestep fell below dt_min = {dt_min:e} at t = {t}")]
    StepUnderflow { t: f64, dt_min: f64 },

    #[error("field is not positive (min {min:e}); {context}")]
    NonPositive { min: f64, context: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
