use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classes used by front ends to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numeric,
    Precondition,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("density evaluation out of accurate range: scaled radius {radius:.3e} exceeds {limit:.3e}")]
    DensityRange { radius: f64, limit: f64 },

    #[error("bridge sampler failed at step {step}: {detail}")]
    SamplerFailure { step: usize, detail: String },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("ground state is degenerate: lambda0 = {lambda0}, lambda1 = {lambda1}")]
    DegenerateGroundState { lambda0: f64, lambda1: f64 },

    #[error("singular potential value at grid point x = {x:?} and no cap configured")]
    SingularGridPoint { x: Vec<f64> },

    #[error("point outside the retained region: {0}")]
    OutOfRange(String),

    #[error("Feynman-Kac weight blew up: log-weight {log_weight:.1} exceeds {limit}")]
    MassBlowup { log_weight: f64, limit: f64 },

    #[error("censored mass {fraction:.3e} exceeds allowed {limit:.1e}")]
    Censored { fraction: f64, limit: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("bad file format in {path:?}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter { .. } | Error::Unsupported(_) | Error::Format { .. } => {
                ErrorClass::Config
            }
            Error::Precondition(_) | Error::OutOfRange(_) => ErrorClass::Precondition,
            Error::Io(_) | Error::Json(_) => ErrorClass::Config,
            _ => ErrorClass::Numeric,
        }
    }
}
