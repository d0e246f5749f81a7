use super::OceError;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A discrete distribution given by support values and probabilities.
///
/// Zero-probability entries are allowed; they do not take part in the
/// support hull used to bracket the certainty-equivalent optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self, OceError> {
        if values.is_empty() {
            return Err(OceError::InvalidDistribution("empty support".into()));
        }
        if values.len() != probs.len() {
            return Err(OceError::InvalidDistribution(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(OceError::InvalidDistribution(format!("value {i} is not finite")));
        }
        if let Some(i) = probs.iter().position(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(OceError::InvalidDistribution(format!(
                "probability {i} is {} (must be >= 0)",
                probs[i]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(OceError::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { values, probs })
    }

    pub fn point_mass(value: f64) -> Self {
        Self { values: vec![value], probs: vec![1.0] }
    }

    /// Uniform weights over `values`.
    pub fn uniform(values: Vec<f64>) -> Result<Self, OceError> {
        let n = values.len();
        Self::new(values, vec![1.0 / n as f64; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterator over `(value, prob)` pairs with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().zip(&self.probs).filter(|(_, p)| **p > 0.0).map(|(v, p)| (*v, *p))
    }

    /// `[min, max]` over the positive-probability values.
    pub fn hull(&self) -> (f64, f64) {
        self.support()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, _)| (lo.min(v), hi.max(v)))
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.support().map(|(v, p)| p * (v - m) * (v - m)).sum()
    }

    /// `E[f(X)]`.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.support().map(|(v, p)| p * f(v)).sum()
    }

    /// The same probabilities with every value shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v + c).collect(), probs: self.probs.clone() }
    }
}
