//! Subgradient weights at the certainty-equivalent optimizer.
//!
//! At an optimizer `l*` the first-order condition reads
//! `1 = E[g(X)]` for some selection `g(x) in du(x - l*)`. Reweighting the
//! original probabilities by `g` gives a new probability measure that
//! linearizes the certainty equivalent around `X`.

use super::distribution::FiniteDistribution;
use super::utility::UtilitySpec;
use super::OceError;

/// Tolerance on `sum_i p_i w_i = 1`.
pub const MEAN_ONE_TOLERANCE: f64 = 1e-8;

/// Weights `w_i in du(values[i] - lambda_star)` with `E[w] = 1`.
///
/// Every weight interpolates between the two one-sided derivatives with one
/// shared coefficient `theta in [0, 1]`; the mean is affine in `theta`. The
/// one-sided derivatives are read a few ulps of the solver tolerance away
/// from the evaluation point so that optimizers produced by the iterative
/// solver (accurate to about `1e-9`) still admit a selection.
pub fn oce_subgradient_weights(
    u: &UtilitySpec,
    dist: &FiniteDistribution,
    lambda_star: f64,
) -> Result<Vec<f64>, OceError> {
    u.validate()?;
    let scale = dist.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let eta = 2e-9 * (1.0 + scale);
    let (from, to): (Vec<f64>, Vec<f64>) = dist
        .values()
        .iter()
        .map(|v| {
            let t = v - lambda_star;
            (u.left_derivative(t - eta), u.right_derivative(t + eta))
        })
        .unzip();
    let base: f64 = dist.probs().iter().zip(&from).map(|(p, w)| p * w).sum();
    let slope: f64 = dist.probs().iter().zip(from.iter().zip(&to)).map(|(p, (a, b))| p * (b - a)).sum();

    let theta = if slope.abs() > 1e-15 { ((1.0 - base) / slope).clamp(0.0, 1.0) } else { 0.0 };
    let weights: Vec<f64> = from.iter().zip(&to).map(|(a, b)| (a + theta * (b - a)).max(0.0)).collect();
    let mean: f64 = dist.probs().iter().zip(&weights).map(|(p, w)| p * w).sum();
    if (mean - 1.0).abs() > MEAN_ONE_TOLERANCE {
        return Err(OceError::NotOptimal { lambda_star, mean });
    }
    Ok(weights)
}
