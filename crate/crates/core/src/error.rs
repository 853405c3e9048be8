//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum SqemError {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("truncation spec mismatch: {0}")]
    SpecMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parametric coupling at or beyond the critical value: xi = {xi}, xi0 = {xi0}")]
    CriticalCouplingExceeded { xi: f64, xi0: f64 },

    #[error("inconsistent derived parameters: {0}")]
    InconsistentParams(String),

    #[error("model invalid: {0}")]
    ModelInvalid(String),

    #[error("integrator step size underflow at t = {t} (h = {h:.3e} after {steps} steps); the generator is too stiff for the explicit solver")]
    Stiffness { t: f64, h: f64, steps: usize },

    #[error("integration accuracy failure at t = {t}: trace drift {drift:.3e} exceeds 1e-6")]
    Accuracy { t: f64, drift: f64 },

    #[error("steady state is not unique or the solve broke down: {0}")]
    NonUniqueSteadyState(String),

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("correlation undefined: mode occupation {occupation:.3e} below the 1e-12 floor")]
    UndefinedCorrelation { occupation: f64 },

    #[error("no operating point found: {0}")]
    NotFound(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SqemError>;
