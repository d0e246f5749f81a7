use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::mdp::TabularMDP;

/// Dirichlet concentration of every transition row.
pub const DIRICHLET_CONCENTRATION: f64 = 0.1;
/// Probability that a reward entry is zero.
pub const ZERO_REWARD_PROBABILITY: f64 = 0.85;

/// Random instance: Dirichlet(0.1, ..., 0.1) transition rows and sparse
/// uniform rewards, starting in state 0.
///
/// Rows are drawn as normalized Gamma(0.1, 1) samples; for each
/// `(h, s, a)` the row is drawn first, then the reward.
pub fn random_mdp<R: Rng + ?Sized>(states: usize, actions: usize, horizon: usize, rng: &mut R) -> TabularMDP {
    assert!(states >= 1 && actions >= 1 && horizon >= 1, "S, A and H must be positive");
    let gamma = Gamma::new(DIRICHLET_CONCENTRATION, 1.0).expect("valid gamma parameters");
    let mut transitions = Vec::with_capacity(horizon * states * actions * states);
    let mut rewards = Vec::with_capacity(horizon * states * actions);
    let mut row = vec![0.0; states];
    for _h in 0..horizon {
        for _s in 0..states {
            for _a in 0..actions {
                // An all-underflow draw has no direction; redraw it.
                loop {
                    row.iter_mut().for_each(|x| *x = gamma.sample(rng));
                    let total: f64 = row.iter().sum();
                    if total > 0.0 {
                        row.iter_mut().for_each(|x| *x /= total);
                        break;
                    }
                }
                transitions.extend_from_slice(&row);
                let r = if rng.random::<f64>() < ZERO_REWARD_PROBABILITY { 0.0 } else { rng.random::<f64>() };
                rewards.push(r);
            }
        }
    }
    TabularMDP::from_flat(states, actions, horizon, transitions, rewards, 0).expect("shapes are consistent")
}
