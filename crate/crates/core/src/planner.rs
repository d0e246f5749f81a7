//! Exact dynamic programming for recursive certainty-equivalent MDPs.
//!
//! `Q[h](s, a) = r[h](s, a) + OCE_{s' ~ P[h](.|s, a)} V[h+1](s')`, solved
//! backwards from `V[H] = 0`. Each stage only reads the stage after it.

use serde::Serialize;
use thiserror::Error;

use crate::mdp::{MdpError, Policy, TabularMDP};
use crate::oce::{oce_eval, FiniteDistribution, OceError, UtilitySpec};

/// Largest policy count [`brute_force_optimal`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Oce(#[from] OceError),
    #[error("brute force would enumerate {count} policies (limit {BRUTE_FORCE_LIMIT})")]
    TooManyPolicies { count: u128 },
}

/// `V[h][s]` for `h in 0..=H` and `Q[h][s][a]` for `h in 0..H`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueTables {
    #[serde(rename = "H")]
    horizon: usize,
    #[serde(rename = "S")]
    states: usize,
    #[serde(rename = "A")]
    actions: usize,
    #[serde(rename = "V")]
    v: Vec<f64>,
    #[serde(rename = "Q")]
    q: Vec<f64>,
}

impl ValueTables {
    /// All-zero tables; the terminal stage is already correct.
    pub fn zeros(horizon: usize, states: usize, actions: usize) -> Self {
        Self {
            horizon,
            states,
            actions,
            v: vec![0.0; (horizon + 1) * states],
            q: vec![0.0; horizon * states * actions],
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

    #[inline]
    pub fn v(&self, h: usize, s: usize) -> f64 {
        self.v[h * self.states + s]
    }

    /// `V[h][.]` as a slice.
    #[inline]
    pub fn v_stage(&self, h: usize) -> &[f64] {
        &self.v[h * self.states..(h + 1) * self.states]
    }

    #[inline]
    pub fn set_v(&mut self, h: usize, s: usize, value: f64) {
        self.v[h * self.states + s] = value;
    }

    #[inline]
    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[(h * self.states + s) * self.actions + a]
    }

    /// `Q[h][s][.]` as a slice.
    #[inline]
    pub fn q_row(&self, h: usize, s: usize) -> &[f64] {
        let start = (h * self.states + s) * self.actions;
        &self.q[start..start + self.actions]
    }

    #[inline]
    pub fn set_q(&mut self, h: usize, s: usize, a: usize, value: f64) {
        self.q[(h * self.states + s) * self.actions + a] = value;
    }

    /// Greedy policy over `Q`, lowest action index on ties.
    pub fn greedy_policy(&self) -> Policy {
        let mut actions = Vec::with_capacity(self.horizon * self.states);
        for h in 0..self.horizon {
            for s in 0..self.states {
                actions.push(argmax_first(self.q_row(h, s)));
            }
        }
        Policy::from_flat(self.horizon, self.states, actions).expect("shape matches")
    }

    /// Checks `V[H] = 0` and `0 <= V[h], Q[h] <= H - h` up to `tol`.
    pub fn bounds_hold(&self, tol: f64) -> bool {
        let terminal_zero = self.v_stage(self.horizon).iter().all(|v| *v == 0.0);
        let stage_ok = (0..self.horizon).all(|h| {
            let cap = (self.horizon - h) as f64 + tol;
            let v_ok = self.v_stage(h).iter().all(|v| *v >= -tol && *v <= cap);
            let q_ok = (0..self.states).all(|s| self.q_row(h, s).iter().all(|q| *q >= -tol && *q <= cap));
            v_ok && q_ok
        });
        terminal_zero && stage_ok
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("value tables serialize")
    }
}

/// Index of the first maximum.
#[inline]
pub fn argmax_first(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// Distribution of `values[s']` under the transition `row`, restricted to
/// next states with positive probability.
pub fn next_value_distribution(row: &[f64], values: &[f64]) -> Result<FiniteDistribution, OceError> {
    let (vals, probs): (Vec<f64>, Vec<f64>) =
        row.iter().zip(values).filter(|(p, _)| **p > 0.0).map(|(p, v)| (*v, *p)).unzip();
    FiniteDistribution::new(vals, probs)
}

fn check_dims(mdp: &TabularMDP, policy: Option<&Policy>) -> Result<(), PlanError> {
    if let Some(policy) = policy {
        policy.check_against(mdp)?;
    }
    if mdp.s_init() >= mdp.states() {
        return Err(MdpError::Dimension(format!("initial state {} out of range", mdp.s_init())).into());
    }
    Ok(())
}

fn backup_stage(mdp: &TabularMDP, u: &UtilitySpec, tables: &mut ValueTables, h: usize) -> Result<(), PlanError> {
    for s in 0..mdp.states() {
        for a in 0..mdp.actions() {
            let dist = next_value_distribution(mdp.row(h, s, a), tables.v_stage(h + 1))?;
            let q = mdp.reward(h, s, a) + oce_eval(u, &dist)?.value;
            tables.set_q(h, s, a, q);
        }
    }
    Ok(())
}

/// Values of a fixed policy.
pub fn evaluate_policy(mdp: &TabularMDP, u: &UtilitySpec, policy: &Policy) -> Result<ValueTables, PlanError> {
    check_dims(mdp, Some(policy))?;
    u.validate()?;
    let mut tables = ValueTables::zeros(mdp.horizon(), mdp.states(), mdp.actions());
    for h in (0..mdp.horizon()).rev() {
        backup_stage(mdp, u, &mut tables, h)?;
        for s in 0..mdp.states() {
            let v = tables.q(h, s, policy.action(h, s));
            tables.set_v(h, s, v);
        }
    }
    Ok(tables)
}

/// Optimal values and a greedy optimal policy (ties to the lowest action).
pub fn optimal_plan(mdp: &TabularMDP, u: &UtilitySpec) -> Result<(ValueTables, Policy), PlanError> {
    check_dims(mdp, None)?;
    u.validate()?;
    let mut tables = ValueTables::zeros(mdp.horizon(), mdp.states(), mdp.actions());
    for h in (0..mdp.horizon()).rev() {
        backup_stage(mdp, u, &mut tables, h)?;
        for s in 0..mdp.states() {
            let row = tables.q_row(h, s);
            let v = row[argmax_first(row)];
            tables.set_v(h, s, v);
        }
    }
    let policy = tables.greedy_policy();
    Ok((tables, policy))
}

/// Best initial-state value over every deterministic Markov policy.
pub fn brute_force_optimal(mdp: &TabularMDP, u: &UtilitySpec) -> Result<f64, PlanError> {
    check_dims(mdp, None)?;
    let cells = mdp.horizon() * mdp.states();
    let count = (mdp.actions() as u128).checked_pow(cells as u32).unwrap_or(u128::MAX);
    if count > BRUTE_FORCE_LIMIT {
        return Err(PlanError::TooManyPolicies { count });
    }
    u.validate()?;
    let mut table = vec![0usize; cells];
    let mut best = f64::NEG_INFINITY;
    let mut current = vec![0.0; mdp.states()];
    let mut next = vec![0.0; mdp.states()];
    loop {
        // Same recursion as `evaluate_policy`, restricted to the chosen actions.
        next.iter_mut().for_each(|v| *v = 0.0);
        for h in (0..mdp.horizon()).rev() {
            for s in 0..mdp.states() {
                let a = table[h * mdp.states() + s];
                let dist = next_value_distribution(mdp.row(h, s, a), &next)?;
                current[s] = mdp.reward(h, s, a) + oce_eval(u, &dist)?.value;
            }
            std::mem::swap(&mut current, &mut next);
        }
        best = best.max(next[mdp.s_init()]);
        // odometer increment
        let mut i = 0;
        loop {
            if i == cells {
                return Ok(best);
            }
            table[i] += 1;
            if table[i] < mdp.actions() {
                break;
            }
            table[i] = 0;
            i += 1;
        }
    }
}
