//! Non-stationary finite-horizon tabular MDPs, deterministic Markov
//! policies and sampled trajectories.
//!
//! Stages are 0-based in every array: stage `h` here is step `h + 1` of an
//! episode, and the value tables carry an extra terminal stage `H`.

use std::fmt::{self, Write as _};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Tolerance on transition row sums.
pub const ROW_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("malformed MDP document: {0}")]
    Format(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One failed invariant, with the indices it refers to.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum { h: usize, s: usize, a: usize, sum: f64 },
    NegativeProbability { h: usize, s: usize, a: usize, next: usize, p: f64 },
    RewardRange { h: usize, s: usize, a: usize, r: f64 },
    InitialState { s_init: usize, states: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { h, s, a, sum } => {
                write!(f, "transition row (h={h}, s={s}, a={a}) sums to {sum}")
            }
            Violation::NegativeProbability { h, s, a, next, p } => {
                write!(f, "transition (h={h}, s={s}, a={a}) -> {next} has probability {p}")
            }
            Violation::RewardRange { h, s, a, r } => {
                write!(f, "reward (h={h}, s={s}, a={a}) = {r} is outside [0, 1]")
            }
            Violation::InitialState { s_init, states } => {
                write!(f, "initial state {s_init} out of range for {states} states")
            }
        }
    }
}

/// Transition kernels `P[h][s][a][s']` and known rewards `r[h][s][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMDP {
    states: usize,
    actions: usize,
    horizon: usize,
    transitions: Vec<f64>,
    rewards: Vec<f64>,
    s_init: usize,
    state_names: Option<Vec<String>>,
    action_names: Option<Vec<String>>,
}

impl TabularMDP {
    /// Builds an MDP from nested tables. Only shapes are checked here; use
    /// [`validate`] for the probabilistic invariants.
    pub fn new(
        transitions: Vec<Vec<Vec<Vec<f64>>>>,
        rewards: Vec<Vec<Vec<f64>>>,
        s_init: usize,
    ) -> Result<Self, MdpError> {
        let horizon = transitions.len();
        if horizon == 0 {
            return Err(MdpError::Dimension("horizon must be at least 1".into()));
        }
        let states = transitions[0].len();
        let actions = transitions[0].first().map_or(0, Vec::len);
        if states == 0 || actions == 0 {
            return Err(MdpError::Dimension("need at least one state and one action".into()));
        }
        if rewards.len() != horizon {
            return Err(MdpError::Dimension(format!(
                "{horizon} transition stages but {} reward stages",
                rewards.len()
            )));
        }
        let mut flat_p = Vec::with_capacity(horizon * states * actions * states);
        let mut flat_r = Vec::with_capacity(horizon * states * actions);
        for (h, (p_h, r_h)) in transitions.into_iter().zip(rewards).enumerate() {
            if p_h.len() != states || r_h.len() != states {
                return Err(MdpError::Dimension(format!("stage {h} does not have {states} states")));
            }
            for (s, (p_hs, r_hs)) in p_h.into_iter().zip(r_h).enumerate() {
                if p_hs.len() != actions || r_hs.len() != actions {
                    return Err(MdpError::Dimension(format!(
                        "(h={h}, s={s}) does not have {actions} actions"
                    )));
                }
                for (a, row) in p_hs.into_iter().enumerate() {
                    if row.len() != states {
                        return Err(MdpError::Dimension(format!(
                            "row (h={h}, s={s}, a={a}) has {} entries, expected {states}",
                            row.len()
                        )));
                    }
                    flat_p.extend(row);
                }
                flat_r.extend(r_hs);
            }
        }
        Self::from_flat(states, actions, horizon, flat_p, flat_r, s_init)
    }

    /// Builds an MDP from row-major flat tables.
    pub fn from_flat(
        states: usize,
        actions: usize,
        horizon: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        s_init: usize,
    ) -> Result<Self, MdpError> {
        if states == 0 || actions == 0 || horizon == 0 {
            return Err(MdpError::Dimension("S, A and H must all be positive".into()));
        }
        if transitions.len() != horizon * states * actions * states {
            return Err(MdpError::Dimension(format!(
                "transition table has {} entries, expected {}",
                transitions.len(),
                horizon * states * actions * states
            )));
        }
        if rewards.len() != horizon * states * actions {
            return Err(MdpError::Dimension(format!(
                "reward table has {} entries, expected {}",
                rewards.len(),
                horizon * states * actions
            )));
        }
        Ok(Self {
            states,
            actions,
            horizon,
            transitions,
            rewards,
            s_init,
            state_names: None,
            action_names: None,
        })
    }

    pub fn with_names(mut self, states: Option<Vec<String>>, actions: Option<Vec<String>>) -> Self {
        self.state_names = states;
        self.action_names = actions;
        self
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn s_init(&self) -> usize {
        self.s_init
    }

    #[inline]
    fn sa_index(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.states + s) * self.actions + a
    }

    /// `P[h][s][a][.]`.
    #[inline]
    pub fn row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let start = self.sa_index(h, s, a) * self.states;
        &self.transitions[start..start + self.states]
    }

    pub fn row_mut(&mut self, h: usize, s: usize, a: usize) -> &mut [f64] {
        let start = self.sa_index(h, s, a) * self.states;
        &mut self.transitions[start..start + self.states]
    }

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.rewards[self.sa_index(h, s, a)]
    }

    pub fn set_reward(&mut self, h: usize, s: usize, a: usize, r: f64) {
        let i = self.sa_index(h, s, a);
        self.rewards[i] = r;
    }

    /// Flat reward table, `[h][s][a]` row-major.
    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Flat transition table, `[h][s][a][s']` row-major.
    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn state_name(&self, s: usize) -> String {
        self.state_names.as_ref().and_then(|n| n.get(s).cloned()).unwrap_or_else(|| s.to_string())
    }

    pub fn action_name(&self, a: usize) -> String {
        self.action_names.as_ref().and_then(|n| n.get(a).cloned()).unwrap_or_else(|| a.to_string())
    }

    pub fn has_action_names(&self) -> bool {
        self.action_names.is_some()
    }

    /// Structured-text document; probabilities and rewards carry 17
    /// significant digits so a round trip is bit-exact.
    pub fn to_json(&self) -> String {
        self.to_json_with_meta(None)
    }

    /// Same as [`TabularMDP::to_json`], plus a `meta` member holding `meta_json`.
    pub fn to_json_with_meta(&self, meta_json: Option<&str>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{{");
        let _ = writeln!(out, "  \"S\": {},", self.states);
        let _ = writeln!(out, "  \"A\": {},", self.actions);
        let _ = writeln!(out, "  \"H\": {},", self.horizon);
        let _ = writeln!(out, "  \"s_init\": {},", self.s_init);
        if let Some(names) = &self.state_names {
            let _ = writeln!(out, "  \"state_names\": {},", serde_json::to_string(names).unwrap());
        }
        if let Some(names) = &self.action_names {
            let _ = writeln!(out, "  \"action_names\": {},", serde_json::to_string(names).unwrap());
        }
        out.push_str("  \"P\": [\n");
        for h in 0..self.horizon {
            out.push_str("    [\n");
            for s in 0..self.states {
                out.push_str("      [");
                for a in 0..self.actions {
                    out.push('[');
                    push_numbers(&mut out, self.row(h, s, a));
                    out.push(']');
                    if a + 1 < self.actions {
                        out.push_str(", ");
                    }
                }
                out.push(']');
                out.push_str(if s + 1 < self.states { ",\n" } else { "\n" });
            }
            out.push_str(if h + 1 < self.horizon { "    ],\n" } else { "    ]\n" });
        }
        out.push_str("  ],\n  \"r\": [\n");
        for h in 0..self.horizon {
            out.push_str("    [");
            for s in 0..self.states {
                out.push('[');
                let start = self.sa_index(h, s, 0);
                push_numbers(&mut out, &self.rewards[start..start + self.actions]);
                out.push(']');
                if s + 1 < self.states {
                    out.push_str(", ");
                }
            }
            out.push(']');
            out.push_str(if h + 1 < self.horizon { ",\n" } else { "\n" });
        }
        match meta_json {
            Some(meta) => {
                out.push_str("  ],\n  \"meta\": ");
                out.push_str(meta);
                out.push_str("\n}\n");
            }
            None => out.push_str("  ]\n}\n"),
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self, MdpError> {
        let doc: MdpDocument = serde_json::from_str(text).map_err(|e| MdpError::Format(e.to_string()))?;
        let mdp = Self::new(doc.transitions, doc.rewards, doc.s_init)?;
        if (mdp.states, mdp.actions, mdp.horizon) != (doc.states, doc.actions, doc.horizon) {
            return Err(MdpError::Dimension(format!(
                "header says S={}, A={}, H={} but tables have S={}, A={}, H={}",
                doc.states, doc.actions, doc.horizon, mdp.states, mdp.actions, mdp.horizon
            )));
        }
        Ok(mdp.with_names(doc.state_names, doc.action_names))
    }

    pub fn load(path: &Path) -> Result<Self, MdpError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| MdpError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    /// Hex SHA-256 of the serialized document.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

fn push_numbers(out: &mut String, xs: &[f64]) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{x:.16e}");
    }
}

#[derive(Deserialize)]
struct MdpDocument {
    #[serde(rename = "S")]
    states: usize,
    #[serde(rename = "A")]
    actions: usize,
    #[serde(rename = "H")]
    horizon: usize,
    s_init: usize,
    #[serde(rename = "P")]
    transitions: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "r")]
    rewards: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    state_names: Option<Vec<String>>,
    #[serde(default)]
    action_names: Option<Vec<String>>,
}

/// Every invariant violation of `mdp`; empty means valid.
pub fn validate(mdp: &TabularMDP) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if mdp.s_init >= mdp.states {
        violations.push(Violation::InitialState { s_init: mdp.s_init, states: mdp.states });
    }
    for h in 0..mdp.horizon {
        for s in 0..mdp.states {
            for a in 0..mdp.actions {
                let row = mdp.row(h, s, a);
                for (next, &p) in row.iter().enumerate() {
                    if !(p >= 0.0) {
                        violations.push(Violation::NegativeProbability { h, s, a, next, p });
                    }
                }
                let sum: f64 = row.iter().sum();
                if !((sum - 1.0).abs() <= ROW_TOLERANCE) {
                    violations.push(Violation::RowSum { h, s, a, sum });
                }
                let r = mdp.reward(h, s, a);
                if !(0.0..=1.0).contains(&r) {
                    violations.push(Violation::RewardRange { h, s, a, r });
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Deterministic Markov policy, one action per `(h, s)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    horizon: usize,
    states: usize,
    actions: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PolicyDocument {
    #[serde(rename = "H")]
    horizon: usize,
    #[serde(rename = "S")]
    states: usize,
    actions: Vec<Vec<usize>>,
}

impl Policy {
    /// Policy that plays `action` everywhere.
    pub fn constant(horizon: usize, states: usize, action: usize) -> Self {
        Self { horizon, states, actions: vec![action; horizon * states] }
    }

    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self, MdpError> {
        let horizon = table.len();
        let states = table.first().map_or(0, Vec::len);
        if table.iter().any(|row| row.len() != states) {
            return Err(MdpError::Dimension("policy rows have different lengths".into()));
        }
        Ok(Self { horizon, states, actions: table.into_iter().flatten().collect() })
    }

    pub fn from_flat(horizon: usize, states: usize, actions: Vec<usize>) -> Result<Self, MdpError> {
        if actions.len() != horizon * states {
            return Err(MdpError::Dimension(format!(
                "policy has {} entries, expected {}",
                actions.len(),
                horizon * states
            )));
        }
        Ok(Self { horizon, states, actions })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn states(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[h * self.states + s]
    }

    pub fn set_action(&mut self, h: usize, s: usize, a: usize) {
        self.actions[h * self.states + s] = a;
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.actions
    }

    /// Checks the table shape and action range against `mdp`.
    pub fn check_against(&self, mdp: &TabularMDP) -> Result<(), MdpError> {
        if self.horizon != mdp.horizon || self.states != mdp.states {
            return Err(MdpError::Dimension(format!(
                "policy is {}x{} but MDP has H={}, S={}",
                self.horizon, self.states, mdp.horizon, mdp.states
            )));
        }
        if let Some(i) = self.actions.iter().position(|&a| a >= mdp.actions) {
            return Err(MdpError::Dimension(format!(
                "policy action {} at (h={}, s={}) is out of range for A={}",
                self.actions[i],
                i / self.states,
                i % self.states,
                mdp.actions
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = PolicyDocument {
            horizon: self.horizon,
            states: self.states,
            actions: self.actions.chunks(self.states.max(1)).map(<[usize]>::to_vec).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("policy serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MdpError> {
        let doc: PolicyDocument = serde_json::from_str(text).map_err(|e| MdpError::Format(e.to_string()))?;
        let policy = Self::from_table(doc.actions)?;
        if policy.horizon != doc.horizon || policy.states != doc.states {
            return Err(MdpError::Dimension("policy header disagrees with its table".into()));
        }
        Ok(policy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `s_1 .. s_{H+1}`.
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
}

/// Draws an index from `row` by inverse CDF in ascending index order.
#[inline]
pub fn sample_index(row: &[f64], uniform: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last_positive = i;
            if uniform < cum {
                return i;
            }
        }
    }
    last_positive
}

/// Plays one episode of `policy` from the initial state.
pub fn sample_episode<R: Rng + ?Sized>(mdp: &TabularMDP, policy: &Policy, rng: &mut R) -> Trajectory {
    let h_len = mdp.horizon;
    let mut traj = Trajectory {
        states: Vec::with_capacity(h_len + 1),
        actions: Vec::with_capacity(h_len),
        rewards: Vec::with_capacity(h_len),
    };
    let mut s = mdp.s_init;
    traj.states.push(s);
    for h in 0..h_len {
        let a = policy.action(h, s);
        traj.actions.push(a);
        traj.rewards.push(mdp.reward(h, s, a));
        s = sample_index(mdp.row(h, s, a), rng.random::<f64>());
        traj.states.push(s);
    }
    traj
}
