//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside protocol domain [0, {t_max}]")]
    OutOfDomain { t: f64, t_max: f64 },

    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("covariance matrix lost positivity (eigenvalue {value:e})")]
    NonPositiveCovariance { value: f64 },

    #[error("determinant drifted by relative {drift:e} during evolution")]
    DeterminantDrift { drift: f64 },

    #[error("series cutoff exceeded hard cap {cap} (tail mass {tail:e})")]
    CutoffCapacity { cap: usize, tail: f64 },

    #[error("tail mass {tail:e} too heavy for moment order {order} (error bound {bound:e})")]
    TailPrecision { order: usize, tail: f64, bound: f64 },

    #[error("population routes disagree by {deviation:e} at n = {n}")]
    RouteMismatch { n: usize, deviation: f64 },

    #[error("truncated propagation leaked {leak:e} past basis cutoff (dim {dim}); increase dim")]
    BasisLeak { dim: usize, leak: f64 },

    #[error("mode k = {k} failed to integrate: {source}")]
    ModeFailure { k: f64, source: Box<Error> },

    #[error("power-law fit needs at least {min} strictly positive points in window, got {got}")]
    FitDomain { min: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
