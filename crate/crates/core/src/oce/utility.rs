//! Normalized utility functions.
//!
//! A utility `u` is nondecreasing, satisfies `u(0) = 0` and has `1` in its
//! subdifferential at the origin. Concave utilities describe risk-averse
//! agents and are paired with a supremum over the cash-allocation parameter;
//! convex ones describe risk-seeking agents and are paired with an infimum.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::OceError;

/// Scalar function `f64 -> f64` shared between threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Risk attitude of a utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Concave utility, certainty equivalent is a supremum.
    RiskAverse,
    /// Convex utility, certainty equivalent is an infimum.
    RiskSeeking,
}

/// User supplied utility given pointwise, with one-sided derivatives.
#[derive(Clone)]
pub struct CustomUtility {
    pub name: String,
    pub value: ScalarFn,
    pub left_derivative: ScalarFn,
    pub right_derivative: ScalarFn,
}

impl fmt::Debug for CustomUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomUtility").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum UtilityKind {
    /// `u(t) = t`; the certainty equivalent is the expectation.
    Mean,
    /// `u(t) = (exp(beta t) - 1) / beta`.
    Entropic { beta: f64 },
    /// `u(t) = -(1/alpha) max(-t, 0)`.
    CVaR { alpha: f64 },
    /// `u(t) = t - c t^2` below `1/(2c)`, constant `1/(4c)` above.
    MeanVariance { c: f64 },
    Custom(CustomUtility),
}

/// A normalized utility together with its risk attitude.
#[derive(Debug, Clone)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    pub mode: Mode,
}

impl UtilitySpec {
    pub fn mean() -> Self {
        Self { kind: UtilityKind::Mean, mode: Mode::RiskAverse }
    }

    /// Entropic utility; the mode follows the sign of `beta`.
    pub fn entropic(beta: f64) -> Self {
        let mode = if beta > 0.0 { Mode::RiskSeeking } else { Mode::RiskAverse };
        Self { kind: UtilityKind::Entropic { beta }, mode }
    }

    pub fn cvar(alpha: f64) -> Self {
        Self { kind: UtilityKind::CVaR { alpha }, mode: Mode::RiskAverse }
    }

    pub fn mean_variance(c: f64) -> Self {
        Self { kind: UtilityKind::MeanVariance { c }, mode: Mode::RiskAverse }
    }

    pub fn custom(custom: CustomUtility, mode: Mode) -> Self {
        Self { kind: UtilityKind::Custom(custom), mode }
    }

    /// Same utility with a different mode. Combine with [`UtilitySpec::validate`].
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Checks parameter ranges and that the mode matches the curvature.
    pub fn validate(&self) -> Result<(), OceError> {
        let bad = |msg: String| Err(OceError::InvalidUtility(msg));
        match &self.kind {
            UtilityKind::Mean => Ok(()),
            UtilityKind::Entropic { beta } => {
                if !beta.is_finite() || *beta == 0.0 {
                    return bad(format!("entropic beta must be finite and nonzero, got {beta}"));
                }
                let expected = if *beta > 0.0 { Mode::RiskSeeking } else { Mode::RiskAverse };
                if self.mode != expected {
                    return Err(OceError::ModeMismatch {
                        utility: self.to_string(),
                        mode: self.mode,
                    });
                }
                Ok(())
            }
            UtilityKind::CVaR { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!("cvar alpha must lie in (0, 1], got {alpha}"));
                }
                self.require_averse()
            }
            UtilityKind::MeanVariance { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return bad(format!("mean-variance c must be positive, got {c}"));
                }
                self.require_averse()
            }
            UtilityKind::Custom(custom) => {
                let at_zero = (custom.value)(0.0);
                if at_zero != 0.0 {
                    return bad(format!("custom utility '{}' has u(0) = {at_zero}", custom.name));
                }
                let left = (custom.left_derivative)(0.0);
                let right = (custom.right_derivative)(0.0);
                let ok = match self.mode {
                    Mode::RiskAverse => left >= 1.0 - 1e-12 && right <= 1.0 + 1e-12,
                    Mode::RiskSeeking => left <= 1.0 + 1e-12 && right >= 1.0 - 1e-12,
                };
                if !ok {
                    return bad(format!(
                        "custom utility '{}': 1 is not a subgradient at 0 (left {left}, right {right})",
                        custom.name
                    ));
                }
                Ok(())
            }
        }
    }

    fn require_averse(&self) -> Result<(), OceError> {
        if self.mode == Mode::RiskAverse {
            Ok(())
        } else {
            Err(OceError::ModeMismatch { utility: self.to_string(), mode: self.mode })
        }
    }

    /// `u(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            UtilityKind::Mean => t,
            UtilityKind::Entropic { beta } => (beta * t).exp_m1() / beta,
            UtilityKind::CVaR { alpha } => t.min(0.0) / alpha,
            UtilityKind::MeanVariance { c } => {
                if t <= 0.5 / c {
                    t - c * t * t
                } else {
                    0.25 / c
                }
            }
            UtilityKind::Custom(custom) => (custom.value)(t),
        }
    }

    /// Left derivative `u'_-(t)`.
    pub fn left_derivative(&self, t: f64) -> f64 {
        match &self.kind {
            UtilityKind::CVaR { alpha } => {
                if t <= 0.0 {
                    1.0 / alpha
                } else {
                    0.0
                }
            }
            UtilityKind::Custom(custom) => (custom.left_derivative)(t),
            _ => self.smooth_derivative(t),
        }
    }

    /// Right derivative `u'_+(t)`.
    pub fn right_derivative(&self, t: f64) -> f64 {
        match &self.kind {
            UtilityKind::CVaR { alpha } => {
                if t < 0.0 {
                    1.0 / alpha
                } else {
                    0.0
                }
            }
            UtilityKind::Custom(custom) => (custom.right_derivative)(t),
            _ => self.smooth_derivative(t),
        }
    }

    // Mean, entropic and mean-variance are continuously differentiable.
    fn smooth_derivative(&self, t: f64) -> f64 {
        match &self.kind {
            UtilityKind::Mean => 1.0,
            UtilityKind::Entropic { beta } => (beta * t).exp(),
            UtilityKind::MeanVariance { c } => (1.0 - 2.0 * c * t).max(0.0),
            _ => unreachable!("kinked utilities handle their own derivatives"),
        }
    }
}

/// `u(t)` as a free function.
pub fn utility_eval(u: &UtilitySpec, t: f64) -> f64 {
    u.eval(t)
}

/// `u'_-(t)` as a free function.
pub fn utility_left_derivative(u: &UtilitySpec, t: f64) -> f64 {
    u.left_derivative(t)
}

impl fmt::Display for UtilitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            UtilityKind::Mean => write!(f, "mean"),
            UtilityKind::Entropic { beta } => write!(f, "entropic:beta={beta}"),
            UtilityKind::CVaR { alpha } => write!(f, "cvar:alpha={alpha}"),
            UtilityKind::MeanVariance { c } => write!(f, "meanvar:c={c}"),
            UtilityKind::Custom(custom) => write!(f, "custom:{}", custom.name),
        }
    }
}

impl FromStr for UtilitySpec {
    type Err = OceError;

    /// Parses `mean`, `entropic:beta=<f>`, `cvar:alpha=<f>` or `meanvar:c=<f>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse_err = || OceError::Parse(s.to_string());
        let (name, param) = match s.split_once(':') {
            Some((name, rest)) => {
                let (key, value) = rest.split_once('=').ok_or_else(parse_err)?;
                let value: f64 = value.trim().parse().map_err(|_| parse_err())?;
                (name.trim(), Some((key.trim(), value)))
            }
            None => (s, None),
        };
        let spec = match (name, param) {
            ("mean", None) => UtilitySpec::mean(),
            ("entropic", Some(("beta", beta))) => UtilitySpec::entropic(beta),
            ("cvar", Some(("alpha", alpha))) => UtilitySpec::cvar(alpha),
            ("meanvar", Some(("c", c))) => UtilitySpec::mean_variance(c),
            _ => return Err(parse_err()),
        };
        spec.validate()?;
        Ok(spec)
    }
}
