//! Optimized certainty equivalents over finite distributions.

mod distribution;
mod solver;
mod subgradient;
mod utility;

pub use distribution::{FiniteDistribution, MASS_TOLERANCE};
pub use solver::{golden_section_max, oce_eval, oce_golden, oce_objective, OceResult, Solver};
pub use subgradient::{oce_subgradient_weights, MEAN_ONE_TOLERANCE};
pub use utility::{
    utility_eval, utility_left_derivative, CustomUtility, Mode, ScalarFn, UtilityKind, UtilitySpec,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OceError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid utility: {0}")]
    InvalidUtility(String),
    #[error("utility {utility} cannot be used in {mode:?} mode")]
    ModeMismatch { utility: String, mode: Mode },
    #[error("cannot parse utility '{0}' (expected mean, entropic:beta=<f>, cvar:alpha=<f> or meanvar:c=<f>)")]
    Parse(String),
    #[error("lambda {lambda_star} is not an optimizer: best subgradient mean is {mean}, expected 1")]
    NotOptimal { lambda_star: f64, mean: f64 },
}
