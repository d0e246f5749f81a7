use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::envgen::{hard_instance, random_mdp, HardInstanceMeta, HardInstanceParams};
use crate::learner::{run_ocevi, LearnerConfig, RegretTrace};
use crate::mdp::{validate, TabularMDP};
use crate::oce::UtilitySpec;
use crate::planner::optimal_plan;

use super::config::{ExperimentConfig, InstanceSource, WORKERS_ENV};
use super::ExperimentError;

pub const ALGO_NAME: &str = "OCE-VI";
pub const SEED_HEADER: &str = "algo,utility,seed,episode,instant_regret,cum_regret";
pub const MEAN_HEADER: &str = "algo,utility,episode,mean_cum_regret,n_seeds";

/// Formats `x` with 10 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Round first so the exponent reflects the printed mantissa.
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..10).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (9 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Episodes written to the CSVs: 1, every multiple of `every`, and K.
pub fn recorded_episodes(episodes: usize, every: usize) -> Vec<usize> {
    let mut out = vec![1];
    out.extend((1..=episodes / every).map(|m| m * every).filter(|&e| e > 1));
    if *out.last().expect("non-empty") != episodes {
        out.push(episodes);
    }
    out
}

/// Builds or loads the instance described by `source`.
pub fn build_instance(
    source: &InstanceSource,
    episodes: usize,
) -> Result<(TabularMDP, Option<HardInstanceMeta>), ExperimentError> {
    match source {
        InstanceSource::Random { states, actions, horizon, gen_seed } => {
            if *states == 0 || *actions == 0 || *horizon == 0 {
                return Err(ExperimentError::Config("S, A and H must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*gen_seed);
            Ok((random_mdp(*states, *actions, *horizon, &mut rng), None))
        }
        InstanceSource::Hard { actions, d, horizon, c1, c2, episodes: planned, target } => {
            let params = HardInstanceParams {
                actions: *actions,
                depth: *d,
                horizon: *horizon,
                c1: *c1,
                c2: *c2,
                episodes: planned.unwrap_or(episodes),
                target: *target,
            };
            let (mdp, meta) = hard_instance(&params)?;
            Ok((mdp, Some(meta)))
        }
        InstanceSource::File { path } => {
            let mdp = TabularMDP::load(path)?;
            validate(&mdp).map_err(|v| ExperimentError::InvalidInstance(v.iter().map(|x| x.to_string()).collect()))?;
            Ok((mdp, None))
        }
    }
}

/// One learning run per seed, in seed order. `workers = 1` runs serially.
///
/// `vstar` is the optimal initial-state value that regret is measured against.
pub fn run_seeds(
    mdp: &TabularMDP,
    u: &UtilitySpec,
    learner: &LearnerConfig,
    vstar: f64,
    seeds: &[u64],
    base_seed: u64,
    workers: usize,
) -> Result<Vec<RegretTrace>, ExperimentError> {
    let one = |seed: u64| -> Result<RegretTrace, ExperimentError> {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(seed));
        let mut trace = run_ocevi(mdp, u, learner, &mut rng, vstar)?;
        trace.meta.seed = Some(seed);
        Ok(trace)
    };
    if workers <= 1 {
        return seeds.iter().map(|&s| one(s)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| seeds.par_iter().map(|&s| one(s)).collect())
}

/// Arithmetic mean of the cumulative regret across traces at each episode.
pub fn mean_cumulative(traces: &[RegretTrace], episodes: &[usize]) -> Vec<f64> {
    episodes
        .iter()
        .map(|&e| traces.iter().map(|t| t.cumulative_at(e)).sum::<f64>() / traces.len() as f64)
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub traces: Vec<RegretTrace>,
    pub episodes: Vec<usize>,
    pub mean: Vec<f64>,
    pub vstar: f64,
    pub seed_csv: PathBuf,
    pub mean_csv: PathBuf,
}

fn worker_count(config: &ExperimentConfig) -> usize {
    config
        .workers
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

/// Runs every seed of `config` and writes both CSV files.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    config.validate()?;
    let u = config.parsed_utility()?;
    let (mdp, _) = build_instance(&config.instance, config.episodes)?;
    let learner = LearnerConfig {
        episodes: config.episodes,
        delta: config.delta.resolve(config.episodes, mdp.horizon())?,
        risk_seeking_bonus: config.risk_seeking_bonus,
    };
    learner.validate()?;
    let vstar = optimal_plan(&mdp, &u)?.0.v(0, mdp.s_init());
    let traces = run_seeds(&mdp, &u, &learner, vstar, &config.seeds, config.base_seed, worker_count(config))?;
    let episodes = recorded_episodes(config.episodes, config.record_interval());
    let mean = mean_cumulative(&traces, &episodes);
    let utility = u.to_string();

    let mut seed_csv = String::from(SEED_HEADER);
    seed_csv.push('\n');
    for trace in &traces {
        let seed = trace.meta.seed.expect("seeded trace");
        for &e in &episodes {
            let r = trace.records[e - 1];
            let _ = writeln!(
                seed_csv,
                "{ALGO_NAME},{utility},{seed},{e},{},{}",
                format_sig(r.instant),
                format_sig(r.cumulative)
            );
        }
    }
    let mut mean_csv = String::from(MEAN_HEADER);
    mean_csv.push('\n');
    for (&e, m) in episodes.iter().zip(&mean) {
        let _ = writeln!(mean_csv, "{ALGO_NAME},{utility},{e},{},{}", format_sig(*m), traces.len());
    }
    let mean_path = config.mean_output();
    write_file(&config.output, &seed_csv)?;
    write_file(&mean_path, &mean_csv)?;
    Ok(ExperimentOutcome { traces, episodes, mean, vstar, seed_csv: config.output.clone(), mean_csv: mean_path })
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    let io = |e: std::io::Error| ExperimentError::Output { path: path.display().to_string(), message: e.to_string() };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}
