use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envgen::HardTarget;
use crate::learner::default_delta;
use crate::oce::UtilitySpec;

use super::ExperimentError;

/// Worker-count override for seed fan-out.
pub const WORKERS_ENV: &str = "OCE_RL_WORKERS";

/// Where the experiment MDP comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceSource {
    Random {
        #[serde(rename = "S")]
        states: usize,
        #[serde(rename = "A")]
        actions: usize,
        #[serde(rename = "H")]
        horizon: usize,
        #[serde(default)]
        gen_seed: u64,
    },
    Hard {
        #[serde(rename = "A")]
        actions: usize,
        d: usize,
        #[serde(rename = "H")]
        horizon: usize,
        c1: f64,
        c2: f64,
        /// Planned episodes for the epsilon formula; defaults to the run's K.
        #[serde(rename = "K", default)]
        episodes: Option<usize>,
        #[serde(default)]
        target: Option<HardTarget>,
    },
    File {
        path: PathBuf,
    },
}

/// Confidence parameter: a number, or `"auto"` for `1 / (2 K H)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSetting {
    Value(f64),
    Named(String),
}

impl Default for DeltaSetting {
    fn default() -> Self {
        DeltaSetting::Named("auto".into())
    }
}

impl DeltaSetting {
    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        if s.trim() == "auto" {
            return Ok(Self::default());
        }
        s.trim()
            .parse()
            .map(DeltaSetting::Value)
            .map_err(|_| ExperimentError::Config(format!("delta must be a number or 'auto', got '{s}'")))
    }

    pub fn resolve(&self, episodes: usize, horizon: usize) -> Result<f64, ExperimentError> {
        match self {
            DeltaSetting::Value(d) => Ok(*d),
            DeltaSetting::Named(name) if name == "auto" => Ok(default_delta(episodes, horizon)),
            DeltaSetting::Named(name) => Err(ExperimentError::Config(format!("unknown delta setting '{name}'"))),
        }
    }
}

/// A fully specified regret experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub utility: String,
    #[serde(rename = "K")]
    pub episodes: usize,
    #[serde(default)]
    pub delta: DeltaSetting,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Added to every seed to form the run's random stream.
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub record_every: Option<usize>,
    pub output: PathBuf,
    #[serde(default)]
    pub risk_seeking_bonus: bool,
    /// Seed-level parallelism; `None` reads the environment.
    #[serde(default)]
    pub workers: Option<usize>,
}

pub fn default_seeds() -> Vec<u64> {
    (0..30).collect()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// `record_every`, defaulting to about a thousand points per series.
    pub fn record_interval(&self) -> usize {
        self.record_every.unwrap_or_else(|| (self.episodes / 1000).max(1))
    }

    pub fn parsed_utility(&self) -> Result<UtilitySpec, ExperimentError> {
        Ok(self.utility.parse()?)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: &str| Err(ExperimentError::Config(msg.to_string()));
        if self.episodes == 0 {
            return bad("K must be at least 1");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        let every = self.record_interval();
        if every == 0 || every > self.episodes {
            return bad("record_every must lie in 1..=K");
        }
        if self.workers == Some(0) {
            return bad("workers must be positive");
        }
        self.parsed_utility()?;
        Ok(())
    }

    /// Companion path for the cross-seed mean: `<stem>_mean.<ext>`.
    pub fn mean_output(&self) -> PathBuf {
        mean_path(&self.output)
    }
}

pub fn mean_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "regret".into());
    let name = match output.extension() {
        Some(ext) => format!("{stem}_mean.{}", ext.to_string_lossy()),
        None => format!("{stem}_mean.csv"),
    };
    output.with_file_name(name)
}

/// Parses `3`, `0,4,7`, `0..30` (exclusive) or `0..=29` (inclusive).
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, ExperimentError> {
    let err = || ExperimentError::Config(format!("cannot parse seeds '{s}'"));
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..=") {
        let (lo, hi): (u64, u64) = (lo.parse().map_err(|_| err())?, hi.parse().map_err(|_| err())?);
        return Ok((lo..=hi).collect());
    }
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi): (u64, u64) = (lo.parse().map_err(|_| err())?, hi.parse().map_err(|_| err())?);
        return Ok((lo..hi).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| err())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_document() {
        let text = r#"{
            "instance": {"kind": "random", "S": 6, "A": 3, "H": 3, "gen_seed": 4},
            "utility": "entropic:beta=-0.6",
            "K": 1000,
            "delta": "auto",
            "seeds": [0, 1, 2],
            "record_every": 10,
            "output": "out/regret.csv"
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert!(c.validate().is_ok());
        assert_eq!(c.instance, InstanceSource::Random { states: 6, actions: 3, horizon: 3, gen_seed: 4 });
        assert_eq!(c.delta.resolve(1000, 3).unwrap(), 1.0 / 6000.0);
        assert_eq!(c.mean_output(), PathBuf::from("out/regret_mean.csv"));
    }

    #[test]
    fn defaults_and_numeric_delta() {
        let text = r#"{"instance": {"kind": "file", "path": "m.json"}, "utility": "mean",
                       "K": 50, "delta": 0.05, "output": "r.csv"}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.seeds, (0..30).collect::<Vec<_>>());
        assert_eq!(c.delta.resolve(50, 2).unwrap(), 0.05);
        assert_eq!(c.record_interval(), 1);
    }

    #[test]
    fn invalid_configs() {
        let base = r#"{"instance": {"kind": "file", "path": "m.json"}, "utility": "mean", "K": 50, "output": "r.csv""#;
        let with = |extra: &str| ExperimentConfig::from_json(&format!("{base}{extra}}}")).unwrap();
        assert!(with(r#", "seeds": []"#).validate().is_err());
        assert!(with(r#", "record_every": 51"#).validate().is_err());
        let mut c = with("");
        c.utility = "cvar:alpha=2".into();
        assert!(c.validate().is_err());
        c.utility = "mean".into();
        c.episodes = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn seed_syntax() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("0, 4,7").unwrap(), vec![0, 4, 7]);
        assert_eq!(parse_seeds("2..5").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_seeds("0..=2").unwrap(), vec![0, 1, 2]);
        assert!(parse_seeds("a..b").is_err());
        assert!(DeltaSetting::parse("often").is_err());
    }
}
