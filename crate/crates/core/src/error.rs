//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParamError {
    /// First violated invariant, by name.
    #[error("{0}")]
    Invalid(&'static str),
    #[error("missing parameter: {0}")]
    Missing(&'static str),
    #[error("parameter file parse error: {0}")]
    Parse(String),
    #[error("cannot read parameter file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PricingError {
    #[error("{0}")]
    InvalidInput(&'static str),
    #[error("mean must be positive")]
    NonPositiveMean,
    #[error("M must be positive")]
    NonPositiveVixMean,
    #[error("delta requires alpha > 1")]
    DeltaRequiresHeavyAlpha,
    #[error("phi beyond MGF domain (phi = {phi}, limit = {limit})")]
    MgfDomain { phi: f64, limit: f64 },
    #[error("quadrature failed to converge: achieved error estimate {achieved:.3e} (target {target:.3e})")]
    QuadratureDidNotConverge { achieved: f64, target: f64 },
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: dates must be strictly increasing")]
    OutOfOrder { line: usize },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CalibrationError {
    #[error("insufficient data: need at least {min} observations, got {got}")]
    InsufficientData { min: usize, got: usize },
    #[error("returns must be finite (offending index {0})")]
    NonFiniteReturn(usize),
    #[error("chain divergence: latent variance {value:.4} exceeded cap {cap:.4} at step {step}")]
    ChainDivergence { value: f64, cap: f64, step: usize },
    #[error("{0}")]
    InvalidConfig(&'static str),
}
