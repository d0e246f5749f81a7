//! The minimax lower-bound family.
//!
//! A waiting state feeds the root of a full `A`-ary tree of depth `d - 1`.
//! Every leaf sends the agent to an absorbing good or bad state; the good
//! state pays 1 per step once the waiting window has closed. One
//! `(step, leaf, action)` triple gets an extra `epsilon` of success
//! probability.
//!
//! State layout: 0 is the waiting state, `1..S-2` the tree nodes in
//! breadth-first order (1 is the root), `S-2` the good state and `S-1`
//! the bad state. Action 0 is the waiting action.

use serde::{Deserialize, Serialize};

use crate::mdp::TabularMDP;
use crate::oce::{oce_golden, FiniteDistribution, UtilitySpec};

use super::EnvGenError;

/// Refuse to build transition tensors larger than this many states.
pub const MAX_HARD_STATES: usize = 4096;

/// The perturbed `(step, leaf, action)`; `step` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardTarget {
    pub step: usize,
    pub leaf: usize,
    pub action: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardInstanceParams {
    pub actions: usize,
    /// Tree depth parameter `d`; the tree itself has depth `d - 1`.
    pub depth: usize,
    pub horizon: usize,
    pub c1: f64,
    pub c2: f64,
    /// Planned number of learning episodes `K`.
    pub episodes: usize,
    /// `None` builds the unperturbed instance.
    pub target: Option<HardTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardInstanceMeta {
    pub p: f64,
    pub epsilon: f64,
    #[serde(rename = "Hbar")]
    pub hbar: usize,
    #[serde(rename = "L")]
    pub leaves: usize,
    #[serde(rename = "S")]
    pub states: usize,
    pub target: Option<HardTarget>,
    pub waiting: usize,
    pub root: usize,
    pub first_leaf: usize,
    pub good: usize,
    pub bad: usize,
}

impl HardInstanceMeta {
    /// State index of leaf `i`.
    pub fn leaf_state(&self, i: usize) -> usize {
        self.first_leaf + i
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metadata serializes")
    }
}

fn geometric_count(actions: usize, depth: usize) -> Option<usize> {
    // 1 + A + ... + A^(d-1)
    let mut total: usize = 0;
    let mut level: usize = 1;
    for _ in 0..depth {
        total = total.checked_add(level)?;
        level = level.checked_mul(actions)?;
    }
    Some(total)
}

impl HardInstanceParams {
    /// Checks every constraint and derives the instance constants.
    pub fn derive(&self) -> Result<HardInstanceMeta, EnvGenError> {
        let fail = |msg: String| Err(EnvGenError::HardParams(msg));
        let &Self { actions, depth, horizon, c1, c2, episodes, target } = self;
        if actions < 2 {
            return fail(format!("need A >= 2, got {actions}"));
        }
        if depth < 1 {
            return fail("need d >= 1".into());
        }
        if !(c1 >= 4.0) {
            return fail(format!("need c1 >= 4, got {c1}"));
        }
        if !(c2 > 2.0) {
            return fail(format!("need c2 > 2, got {c2}"));
        }
        let tree = match geometric_count(actions, depth) {
            Some(n) if n + 3 <= MAX_HARD_STATES => n,
            _ => return fail(format!("tree with A={actions}, d={depth} exceeds {MAX_HARD_STATES} states")),
        };
        let states = tree + 3;
        let leaves = actions.pow(depth as u32 - 1);
        let h = horizon as f64;
        if h < c2 * depth as f64 {
            return fail(format!("need H >= c2 d = {}, got H = {horizon}", c2 * depth as f64));
        }
        if h < 2.0 * c2 * depth as f64 {
            return fail(format!("need H >= 2 c2 d = {}, got H = {horizon}", 2.0 * c2 * depth as f64));
        }
        let min_k = c1 * h * states as f64 * actions as f64 / (2.0 * c2);
        if (episodes as f64) < min_k {
            return fail(format!("need K >= c1 H S A / (2 c2) = {min_k}, got K = {episodes}"));
        }
        let hbar = (h / c2).floor() as usize;
        if hbar < 1 {
            return fail("waiting window floor(H / c2) is empty".into());
        }
        if hbar + depth >= horizon {
            return fail(format!("need Hbar < H - d, got Hbar = {hbar}, H - d = {}", horizon - depth));
        }
        let p = 1.0 - 2.0 / c1;
        let arms = (hbar * leaves * actions) as f64;
        let epsilon = (p / (2.0 * c1)).sqrt() * (1.0 - 1.0 / arms) * (arms / episodes as f64).sqrt();
        if p + epsilon > 1.0 {
            return fail(format!("p + epsilon = {} exceeds 1", p + epsilon));
        }
        let eps_max = ((1.0 - 2.0 * p) + (1.0 - 4.0 * p / c1).sqrt()) / 2.0;
        if epsilon > eps_max {
            return fail(format!("epsilon = {epsilon} exceeds its feasibility bound {eps_max}"));
        }
        if let Some(t) = target {
            if t.step < 1 + depth || t.step > hbar + depth {
                return fail(format!("target step must lie in {}..={}, got {}", 1 + depth, hbar + depth, t.step));
            }
            if t.leaf >= leaves {
                return fail(format!("target leaf {} out of range for L = {leaves}", t.leaf));
            }
            if t.action >= actions {
                return fail(format!("target action {} out of range for A = {actions}", t.action));
            }
        }
        Ok(HardInstanceMeta {
            p,
            epsilon,
            hbar,
            leaves,
            states,
            target,
            waiting: 0,
            root: 1,
            first_leaf: 1 + tree - leaves,
            good: states - 2,
            bad: states - 1,
        })
    }
}

/// Builds the instance and its metadata.
pub fn hard_instance(params: &HardInstanceParams) -> Result<(TabularMDP, HardInstanceMeta), EnvGenError> {
    let meta = params.derive()?;
    let (n, a_count, horizon, depth) = (meta.states, params.actions, params.horizon, params.depth);
    let mut transitions = vec![0.0; horizon * n * a_count * n];
    let mut rewards = vec![0.0; horizon * n * a_count];
    let first_leaf = meta.first_leaf;
    for h in 0..horizon {
        let step = h + 1;
        for s in 0..n {
            for a in 0..a_count {
                let base = ((h * n + s) * a_count + a) * n;
                let row = &mut transitions[base..base + n];
                if s == meta.waiting {
                    if a == 0 && step <= meta.hbar {
                        row[meta.waiting] = 1.0;
                    } else {
                        row[meta.root] = 1.0;
                    }
                } else if s == meta.good || s == meta.bad {
                    row[s] = 1.0;
                } else if s >= first_leaf {
                    let bump = match meta.target {
                        Some(t) if t.step == step && meta.leaf_state(t.leaf) == s && t.action == a => meta.epsilon,
                        _ => 0.0,
                    };
                    row[meta.good] = meta.p + bump;
                    row[meta.bad] = 1.0 - meta.p - bump;
                } else {
                    // tree node s has tree index s - 1; its a-th child has tree index A (s - 1) + 1 + a
                    row[a_count * (s - 1) + 1 + a + 1] = 1.0;
                }
                if s == meta.good && step > meta.hbar + depth {
                    rewards[(h * n + s) * a_count + a] = 1.0;
                }
            }
        }
    }
    let names = (0..n)
        .map(|s| match s {
            s if s == meta.waiting => "wait".to_string(),
            s if s == meta.good => "good".to_string(),
            s if s == meta.bad => "bad".to_string(),
            s if s >= first_leaf => format!("leaf{}", s - first_leaf),
            s if s == meta.root => "root".to_string(),
            s => format!("node{}", s - 1),
        })
        .collect();
    let mdp = TabularMDP::from_flat(n, a_count, horizon, transitions, rewards, meta.waiting)
        .expect("shapes are consistent")
        .with_names(Some(names), None);
    Ok((mdp, meta))
}

/// Closed-form optimal initial value: the certainty equivalent of
/// `H - Hbar - d` paid with the best achievable success probability, else 0.
pub fn hard_instance_optimal_value(
    meta: &HardInstanceMeta,
    params: &HardInstanceParams,
    u: &UtilitySpec,
) -> Result<f64, EnvGenError> {
    let payoff = (params.horizon - meta.hbar - params.depth) as f64;
    let success = if meta.target.is_some() { meta.p + meta.epsilon } else { meta.p };
    let dist = FiniteDistribution::new(vec![payoff, 0.0], vec![success, 1.0 - success])?;
    Ok(oce_golden(u, &dist)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::validate;

    fn params(target: Option<HardTarget>) -> HardInstanceParams {
        HardInstanceParams { actions: 2, depth: 2, horizon: 12, c1: 4.0, c2: 3.0, episodes: 2000, target }
    }

    #[test]
    fn layout_constants() {
        let meta = params(None).derive().unwrap();
        assert_eq!(meta.states, 6);
        assert_eq!(meta.leaves, 2);
        assert_eq!(meta.p, 0.5);
        assert_eq!(meta.hbar, 4);
        assert_eq!((meta.first_leaf, meta.good, meta.bad), (2, 4, 5));
    }

    #[test]
    fn epsilon_formula() {
        // d = 1 leaves a single leaf, so Hbar L A = 2 * 1 * 2.
        let p = HardInstanceParams { actions: 2, depth: 1, horizon: 6, c1: 4.0, c2: 3.0, episodes: 100, target: None };
        let meta = p.derive().unwrap();
        assert_eq!(meta.hbar, 2);
        assert_eq!(meta.leaves, 1);
        let arms = 4.0_f64;
        let expected = (0.5_f64 / 8.0).sqrt() * (1.0 - 1.0 / arms) * (arms / 100.0).sqrt();
        assert!((meta.epsilon - expected).abs() < 1e-15);
        // reference case Hbar L A = 8, K = 100
        let reference = (0.5_f64 / 8.0).sqrt() * 0.875 * 0.08_f64.sqrt();
        assert!((reference - 0.061872).abs() < 1e-6);
    }

    #[test]
    fn rows_are_valid_and_leaf_rows_perturbed_once() {
        let target = HardTarget { step: 4, leaf: 1, action: 1 };
        let (m0, _) = hard_instance(&params(None)).unwrap();
        let (m1, meta) = hard_instance(&params(Some(target))).unwrap();
        assert!(validate(&m0).is_ok());
        assert!(validate(&m1).is_ok());
        let diffs: Vec<f64> = m0
            .transitions()
            .iter()
            .zip(m1.transitions())
            .map(|(a, b)| b - a)
            .filter(|d| *d != 0.0)
            .collect();
        assert_eq!(diffs.len(), 2);
        assert!(diffs.iter().all(|d| (d.abs() - meta.epsilon).abs() < 1e-15));
        assert_eq!(m1.row(3, meta.leaf_state(1), 1)[meta.good], meta.p + meta.epsilon);
    }

    #[test]
    fn waiting_dynamics() {
        let (m, meta) = hard_instance(&params(None)).unwrap();
        assert_eq!(m.row(0, 0, 0)[0], 1.0);
        assert_eq!(m.row(0, 0, 1)[meta.root], 1.0);
        // step Hbar + 1 forces the agent out
        assert_eq!(m.row(meta.hbar, 0, 0)[meta.root], 1.0);
        assert_eq!(m.reward(11, meta.good, 0), 1.0);
        assert_eq!(m.reward(meta.hbar + 1, meta.good, 0), 0.0);
        assert_eq!(m.reward(meta.hbar + 2, meta.good, 1), 1.0);
        assert_eq!(m.row(0, meta.root, 1)[3], 1.0);
    }

    #[test]
    fn constraint_violations_are_named() {
        let mut p = params(None);
        p.horizon = 10;
        assert!(p.derive().unwrap_err().to_string().contains("2 c2 d"));
        let mut p = params(None);
        p.episodes = 10;
        assert!(p.derive().unwrap_err().to_string().contains("K >="));
        let mut p = params(None);
        p.c1 = 3.0;
        assert!(p.derive().is_err());
        let mut p = params(None);
        p.c2 = 2.0;
        assert!(p.derive().is_err());
        let p = params(Some(HardTarget { step: 2, leaf: 0, action: 0 }));
        assert!(p.derive().unwrap_err().to_string().contains("target step"));
        let p = params(Some(HardTarget { step: 3, leaf: 2, action: 0 }));
        assert!(p.derive().unwrap_err().to_string().contains("target leaf"));
    }

    #[test]
    fn mean_closed_form() {
        let p = params(Some(HardTarget { step: 3, leaf: 0, action: 0 }));
        let meta = p.derive().unwrap();
        let v = hard_instance_optimal_value(&meta, &p, &UtilitySpec::mean()).unwrap();
        assert!((v - (meta.p + meta.epsilon) * 6.0).abs() < 1e-8);
        let p0 = params(None);
        let v0 = hard_instance_optimal_value(&p0.derive().unwrap(), &p0, &UtilitySpec::mean()).unwrap();
        assert!((v0 - 3.0).abs() < 1e-8);
    }
}
