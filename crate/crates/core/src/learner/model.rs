use crate::mdp::Trajectory;
use crate::oce::{FiniteDistribution, OceError};

use super::LearnerError;

/// Probability vector over next states `0..S`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution {
    probs: Vec<f64>,
}

impl StateDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, OceError> {
        // Reuse the finite-distribution checks with indices as values.
        let indices = (0..probs.len()).map(|i| i as f64).collect();
        let checked = FiniteDistribution::new(indices, probs)?;
        Ok(Self { probs: checked.probs().to_vec() })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Distribution of `values[s']` for `s'` drawn from this row; keeps
    /// every state, including null ones, so indices line up with `values`.
    pub fn over(&self, values: &[f64]) -> Result<FiniteDistribution, OceError> {
        FiniteDistribution::new(values.to_vec(), self.probs.clone())
    }

    /// `E[values[s']]`.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

/// Visit counts `N[h](s, a)` and `N[h](s, a, s')` gathered so far.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel {
    horizon: usize,
    states: usize,
    actions: usize,
    n_sa: Vec<u64>,
    n_sas: Vec<u64>,
    episodes_seen: u64,
}

impl EmpiricalModel {
    pub fn new(horizon: usize, states: usize, actions: usize) -> Self {
        Self {
            horizon,
            states,
            actions,
            n_sa: vec![0; horizon * states * actions],
            n_sas: vec![0; horizon * states * actions * states],
            episodes_seen: 0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn episodes_seen(&self) -> u64 {
        self.episodes_seen
    }

    #[inline]
    fn index(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.states + s) * self.actions + a
    }

    #[inline]
    pub fn n_sa(&self, h: usize, s: usize, a: usize) -> u64 {
        self.n_sa[self.index(h, s, a)]
    }

    /// `N[h](s, a, .)`.
    #[inline]
    pub fn next_counts(&self, h: usize, s: usize, a: usize) -> &[u64] {
        let start = self.index(h, s, a) * self.states;
        &self.n_sas[start..start + self.states]
    }

    /// Adds one transition without touching the episode counter.
    pub fn add_transition(&mut self, h: usize, s: usize, a: usize, next: usize) {
        let i = self.index(h, s, a);
        self.n_sa[i] += 1;
        self.n_sas[i * self.states + next] += 1;
    }

    /// Adds every transition of a completed episode.
    pub fn record(&mut self, trajectory: &Trajectory) {
        for h in 0..self.horizon {
            self.add_transition(h, trajectory.states[h], trajectory.actions[h], trajectory.states[h + 1]);
        }
        self.episodes_seen += 1;
    }

    /// Both count invariants: pair counts equal summed triple counts and
    /// every stage has seen exactly `episodes_seen` visits.
    pub fn is_consistent(&self) -> bool {
        let pairs_match = (0..self.n_sa.len())
            .all(|i| self.n_sa[i] == self.n_sas[i * self.states..(i + 1) * self.states].iter().sum::<u64>());
        let stage_totals = (0..self.horizon).all(|h| {
            let block = h * self.states * self.actions;
            self.n_sa[block..block + self.states * self.actions].iter().sum::<u64>() == self.episodes_seen
        });
        pairs_match && stage_totals
    }
}

/// `N[h](s, a, s') / N[h](s, a)`; unvisited pairs are an error.
pub fn empirical_transition(
    model: &EmpiricalModel,
    h: usize,
    s: usize,
    a: usize,
) -> Result<StateDistribution, LearnerError> {
    let n = model.n_sa(h, s, a);
    if n == 0 {
        return Err(LearnerError::Unvisited { h, s, a });
    }
    let probs = model.next_counts(h, s, a).iter().map(|&c| c as f64 / n as f64).collect();
    Ok(StateDistribution::new(probs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        let mut m = EmpiricalModel::new(1, 3, 1);
        for next in [0, 0, 1, 0] {
            m.add_transition(0, 2, 0, next);
        }
        let p = empirical_transition(&m, 0, 2, 0).unwrap();
        assert_eq!(p.probs(), &[0.75, 0.25, 0.0]);
    }

    #[test]
    fn single_visit_point_mass() {
        let mut m = EmpiricalModel::new(1, 3, 1);
        m.add_transition(0, 0, 0, 2);
        assert_eq!(empirical_transition(&m, 0, 0, 0).unwrap().probs(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn unvisited_is_error() {
        let m = EmpiricalModel::new(2, 2, 2);
        assert!(matches!(empirical_transition(&m, 1, 0, 1), Err(LearnerError::Unvisited { h: 1, s: 0, a: 1 })));
    }

    #[test]
    fn record_keeps_invariants() {
        let mut m = EmpiricalModel::new(2, 3, 2);
        let t = Trajectory { states: vec![0, 2, 1], actions: vec![1, 0], rewards: vec![0.0, 0.0] };
        m.record(&t);
        m.record(&t);
        assert!(m.is_consistent());
        assert_eq!(m.n_sa(1, 2, 0), 2);
        assert_eq!(m.next_counts(0, 0, 1), &[0, 0, 2]);
        m.add_transition(0, 0, 0, 0);
        assert!(!m.is_consistent());
    }
}
