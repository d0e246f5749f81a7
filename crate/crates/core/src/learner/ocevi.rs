//! Optimistic value iteration with utility-scaled bonuses.
//!
//! Every episode the learner rebuilds optimistic `Q` tables from its visit
//! counts, acts greedily on them for one episode, and adds the observed
//! transitions to its counts. Regret is measured exactly by evaluating each
//! executed policy on the true model.

use rand::Rng;
use serde::Serialize;

use crate::mdp::{sample_episode, Policy, TabularMDP, Trajectory};
use crate::oce::{oce_eval, FiniteDistribution, UtilitySpec};
use crate::planner::{argmax_first, evaluate_policy, ValueTables};

use super::bonus::BonusSchedule;
use super::model::EmpiricalModel;
use super::LearnerError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    /// Number of episodes, known in advance.
    pub episodes: usize,
    pub delta: f64,
    pub risk_seeking_bonus: bool,
}

impl LearnerConfig {
    /// `delta = 1 / (2 K H)`.
    pub fn new(episodes: usize, horizon: usize) -> Self {
        Self { episodes, delta: default_delta(episodes, horizon), risk_seeking_bonus: false }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        if self.episodes == 0 {
            return Err(LearnerError::Config("K must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LearnerError::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }
}

pub fn default_delta(episodes: usize, horizon: usize) -> f64 {
    1.0 / (2.0 * episodes as f64 * horizon as f64)
}

/// Optimistic tables from the current counts, with their greedy policy.
///
/// `rewards` is the known reward table, flat `[h][s][a]`.
pub fn optimistic_backup(
    model: &EmpiricalModel,
    rewards: &[f64],
    u: &UtilitySpec,
    config: &LearnerConfig,
) -> Result<(ValueTables, Policy), LearnerError> {
    let mut tables = ValueTables::zeros(model.horizon(), model.states(), model.actions());
    let schedule = BonusSchedule::new(
        model.states(),
        model.actions(),
        model.horizon(),
        config.episodes,
        config.delta,
        config.risk_seeking_bonus,
    );
    optimistic_backup_into(model, rewards, u, &schedule, &mut tables)?;
    let policy = tables.greedy_policy();
    Ok((tables, policy))
}

pub(crate) fn optimistic_backup_into(
    model: &EmpiricalModel,
    rewards: &[f64],
    u: &UtilitySpec,
    schedule: &BonusSchedule,
    tables: &mut ValueTables,
) -> Result<(), LearnerError> {
    let (horizon, states, actions) = (model.horizon(), model.states(), model.actions());
    if rewards.len() != horizon * states * actions {
        return Err(LearnerError::Config(format!(
            "reward table has {} entries, expected {}",
            rewards.len(),
            horizon * states * actions
        )));
    }
    let mut values = Vec::with_capacity(states);
    let mut probs = Vec::with_capacity(states);
    for h in (0..horizon).rev() {
        let cap = (horizon - h) as f64;
        for s in 0..states {
            for a in 0..actions {
                let n = model.n_sa(h, s, a);
                let q = if n == 0 {
                    cap
                } else {
                    values.clear();
                    probs.clear();
                    let next_v = tables.v_stage(h + 1);
                    for (next, &c) in model.next_counts(h, s, a).iter().enumerate() {
                        if c > 0 {
                            values.push(next_v[next]);
                            probs.push(c as f64 / n as f64);
                        }
                    }
                    let dist = FiniteDistribution::new(values.clone(), probs.clone())?;
                    let ce = oce_eval(u, &dist)?.value;
                    let r = rewards[(h * states + s) * actions + a];
                    (r + ce + schedule.bonus(u, h + 1, n)).min(cap)
                };
                tables.set_q(h, s, a, q);
            }
            let row = tables.q_row(h, s);
            let v = row[argmax_first(row)];
            tables.set_v(h, s, v);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegretRecord {
    /// 1-based episode index.
    pub episode: usize,
    pub instant: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceMeta {
    pub utility: String,
    pub seed: Option<u64>,
    pub instance_digest: String,
}

/// Per-episode expected regret of one learning run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretTrace {
    pub records: Vec<RegretRecord>,
    pub meta: TraceMeta,
}

impl RegretTrace {
    pub fn total(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumulative)
    }

    /// Cumulative regret after `episode` (1-based).
    pub fn cumulative_at(&self, episode: usize) -> f64 {
        self.records[episode - 1].cumulative
    }
}

/// What the learner saw and did in one episode.
pub struct EpisodeView<'a> {
    /// 1-based episode index.
    pub episode: usize,
    /// Optimistic tables the policy was built from.
    pub optimistic: &'a ValueTables,
    pub policy: &'a Policy,
    /// Counts before this episode's transitions were added.
    pub counts: &'a EmpiricalModel,
    pub trajectory: &'a Trajectory,
    pub instant_regret: f64,
}

/// Runs the learner for `config.episodes` episodes against `mdp`.
///
/// `vstar` is the optimal initial-state value of `mdp` under `u`.
pub fn run_ocevi<R: Rng + ?Sized>(
    mdp: &TabularMDP,
    u: &UtilitySpec,
    config: &LearnerConfig,
    rng: &mut R,
    vstar: f64,
) -> Result<RegretTrace, LearnerError> {
    run_ocevi_observed(mdp, u, config, rng, vstar, |_| {})
}

/// [`run_ocevi`] with a callback after every episode.
pub fn run_ocevi_observed<R, F>(
    mdp: &TabularMDP,
    u: &UtilitySpec,
    config: &LearnerConfig,
    rng: &mut R,
    vstar: f64,
    mut observe: F,
) -> Result<RegretTrace, LearnerError>
where
    R: Rng + ?Sized,
    F: FnMut(&EpisodeView<'_>),
{
    config.validate()?;
    u.validate()?;
    let (horizon, states, actions) = (mdp.horizon(), mdp.states(), mdp.actions());
    let schedule =
        BonusSchedule::new(states, actions, horizon, config.episodes, config.delta, config.risk_seeking_bonus);
    let mut model = EmpiricalModel::new(horizon, states, actions);
    let mut tables = ValueTables::zeros(horizon, states, actions);
    let mut records = Vec::with_capacity(config.episodes);
    let mut cached: Option<(Policy, f64)> = None;
    let mut cumulative = 0.0;

    for episode in 1..=config.episodes {
        optimistic_backup_into(&model, mdp.rewards(), u, &schedule, &mut tables)?;
        let policy = tables.greedy_policy();
        let value = match &cached {
            Some((previous, v)) if *previous == policy => *v,
            _ => {
                let v = evaluate_policy(mdp, u, &policy)?.v(0, mdp.s_init());
                cached = Some((policy.clone(), v));
                v
            }
        };
        let instant = vstar - value;
        cumulative += instant;
        records.push(RegretRecord { episode, instant, cumulative });

        let trajectory = sample_episode(mdp, &policy, rng);
        observe(&EpisodeView {
            episode,
            optimistic: &tables,
            policy: &policy,
            counts: &model,
            trajectory: &trajectory,
            instant_regret: instant,
        });
        model.record(&trajectory);
    }

    Ok(RegretTrace {
        records,
        meta: TraceMeta { utility: u.to_string(), seed: None, instance_digest: mdp.digest() },
    })
}
