//! Gamma switch-timing model.
//!
//! The time from the start of a scan pass to the user's switch action is
//! modeled as `X ~ Gamma(kappa, theta)`. Aiming at row `j` with cursor step
//! `D`, the switch is early before `D*j`, correct inside `[D*j, D*(j+1))`
//! and a miss afterwards. Per-stage error rates compose into the per-key
//! error table consumed by the layout costs.

mod distribution;
mod fit;
pub mod io;
mod nelder_mead;
pub mod special;
mod table;

use thiserror::Error;

use crate::scalar::Real;

pub use distribution::{
    category_probs, classify_elapsed, gamma_cdf, gamma_pdf, gamma_sf, CategoryProbs, Outcome,
};
pub use fit::{
    fit_gamma_counts, fit_gamma_samples, Condition, FitReport, RawTimingSamples,
    TimingObservations, TimingRecord, LOG_PARAM_BOX, MIN_RAW_SAMPLES,
};
pub use nelder_mead::{nelder_mead, NelderMeadConfig, NelderMeadResult};
pub use table::{build_error_table, ErrorTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("objective is not finite at the start point")]
    NonFiniteObjective,
    #[error("no observations for duration {duration} and row {row}")]
    NoDataForCondition { duration: f64, row: usize },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("samples have zero variance")]
    ZeroVariance,
    #[error("no Gamma parameters for stage index {0}")]
    MissingParams(usize),
    #[error("series or continued fraction failed to converge")]
    ConvergenceFailure,
}

/// Shape `kappa` (dimensionless) and scale `theta` (seconds), both positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams<T> {
    kappa: T,
    theta: T,
}

impl<T: Real> GammaParams<T> {
    pub fn new(kappa: T, theta: T) -> Result<Self, ModelError> {
        if !(kappa > T::zero() && kappa.is_finite()) {
            return Err(ModelError::Domain("kappa must be positive and finite"));
        }
        if !(theta > T::zero() && theta.is_finite()) {
            return Err(ModelError::Domain("theta must be positive and finite"));
        }
        Ok(Self { kappa, theta })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn mean(&self) -> T {
        self.kappa * self.theta
    }
}
