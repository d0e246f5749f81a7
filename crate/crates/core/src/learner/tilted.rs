use crate::oce::MEAN_ONE_TOLERANCE;

use super::model::StateDistribution;
use super::LearnerError;

/// Reweights a transition row by subgradient weights: `B(s') = P(s') w(s')`.
///
/// The weights must be nonnegative with `sum P w = 1` up to
/// [`MEAN_ONE_TOLERANCE`]; the result is renormalized to remove that slack.
pub fn tilted_transition(row: &StateDistribution, weights: &[f64]) -> Result<StateDistribution, LearnerError> {
    if weights.len() != row.probs().len() {
        return Err(LearnerError::Tilt(format!(
            "{} weights for a row over {} states",
            weights.len(),
            row.probs().len()
        )));
    }
    if let Some(i) = weights.iter().position(|w| !(*w >= 0.0)) {
        return Err(LearnerError::Tilt(format!("weight {i} is {}", weights[i])));
    }
    let tilted: Vec<f64> = row.probs().iter().zip(weights).map(|(p, w)| p * w).collect();
    let total: f64 = tilted.iter().sum();
    if (total - 1.0).abs() > MEAN_ONE_TOLERANCE {
        return Err(LearnerError::Tilt(format!("weighted mass is {total}, expected 1")));
    }
    Ok(StateDistribution::new(tilted.into_iter().map(|b| b / total).collect())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oce::{oce_subgradient_weights, FiniteDistribution, UtilitySpec};

    #[test]
    fn unit_weights_keep_row() {
        let row = StateDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(tilted_transition(&row, &[1.0; 3]).unwrap(), row);
    }

    #[test]
    fn cvar_moves_mass_to_bad_state() {
        let row = StateDistribution::new(vec![0.5, 0.5]).unwrap();
        let dist = FiniteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let w = oce_subgradient_weights(&UtilitySpec::cvar(0.5), &dist, 0.0).unwrap();
        let b = tilted_transition(&row, &w).unwrap();
        assert!((b.probs()[0] - 1.0).abs() < 1e-12);
        assert!(b.probs()[1].abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_weights() {
        let row = StateDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!(tilted_transition(&row, &[1.0, 1.2]).is_err());
        assert!(tilted_transition(&row, &[2.5, -0.5]).is_err());
        assert!(tilted_transition(&row, &[1.0]).is_err());
    }
}
