use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::envgen::{hard_instance, random_mdp, HardInstanceParams, HardTarget};
use crate::mdp::{validate, Policy, TabularMDP};
use crate::oce::UtilitySpec;
use crate::planner::{evaluate_policy, optimal_plan};

use super::config::{parse_seeds, DeltaSetting, ExperimentConfig, InstanceSource};
use super::run::{format_sig, run_experiment};
use super::ExperimentError;

#[derive(Debug, Parser)]
#[command(name = "oce-rl", version, about = "Risk-sensitive tabular RL with optimized certainty equivalents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random MDP with sparse Dirichlet rows.
    GenRandom {
        #[arg(long = "S")]
        states: usize,
        #[arg(long = "A")]
        actions: usize,
        #[arg(long = "H")]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a lower-bound instance and print its constants.
    GenHard {
        #[command(flatten)]
        hard: HardArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print optimal values, Q-values and the greedy policy.
    Plan {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        utility: String,
    },
    /// Print the value of a fixed policy.
    Eval {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        utility: String,
    },
    /// Run a multi-seed regret experiment.
    Run(RunArgs),
    /// Check an MDP file against its invariants.
    Validate {
        #[arg(long)]
        mdp: PathBuf,
    },
}

#[derive(Debug, Args)]
struct HardArgs {
    #[arg(long = "A")]
    actions: usize,
    #[arg(long)]
    d: usize,
    #[arg(long = "H")]
    horizon: usize,
    #[arg(long)]
    c1: f64,
    #[arg(long)]
    c2: f64,
    #[arg(long = "K")]
    episodes: usize,
    /// 1-based step of the perturbed leaf.
    #[arg(long, requires_all = ["target_leaf", "target_action"])]
    target_step: Option<usize>,
    #[arg(long, requires = "target_step")]
    target_leaf: Option<usize>,
    #[arg(long, requires = "target_step")]
    target_action: Option<usize>,
}

impl HardArgs {
    fn params(&self) -> HardInstanceParams {
        let target = match (self.target_step, self.target_leaf, self.target_action) {
            (Some(step), Some(leaf), Some(action)) => Some(HardTarget { step, leaf, action }),
            _ => None,
        };
        HardInstanceParams {
            actions: self.actions,
            depth: self.d,
            horizon: self.horizon,
            c1: self.c1,
            c2: self.c2,
            episodes: self.episodes,
            target,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config; any flag below overrides its field.
    #[arg(long)]
    config: Option<PathBuf>,
    /// MDP file to learn on.
    #[arg(long, conflicts_with_all = ["states", "actions", "horizon"])]
    mdp: Option<PathBuf>,
    #[arg(long = "S", requires_all = ["actions", "horizon"])]
    states: Option<usize>,
    #[arg(long = "A")]
    actions: Option<usize>,
    #[arg(long = "H")]
    horizon: Option<usize>,
    #[arg(long)]
    gen_seed: Option<u64>,
    #[arg(long)]
    utility: Option<String>,
    #[arg(long = "K")]
    episodes: Option<usize>,
    /// A number or `auto`.
    #[arg(long)]
    delta: Option<String>,
    /// `0..30`, `0..=29`, or a comma list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    risk_seeking_bonus: bool,
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, ExperimentError> {
        let missing = |name: &str| ExperimentError::Config(format!("--{name} is required without --config"));
        let base = self.config.as_deref().map(ExperimentConfig::load).transpose()?;
        let instance = match (&self.mdp, self.states, self.actions, self.horizon) {
            (Some(path), ..) => Some(InstanceSource::File { path: path.clone() }),
            (None, Some(states), Some(actions), Some(horizon)) => {
                Some(InstanceSource::Random { states, actions, horizon, gen_seed: self.gen_seed.unwrap_or(0) })
            }
            _ => None,
        };
        let mut config = match base {
            Some(c) => c,
            None => ExperimentConfig {
                instance: instance.clone().ok_or_else(|| missing("mdp or --S/--A/--H"))?,
                utility: self.utility.clone().ok_or_else(|| missing("utility"))?,
                episodes: self.episodes.ok_or_else(|| missing("K"))?,
                delta: DeltaSetting::default(),
                seeds: super::config::default_seeds(),
                base_seed: 0,
                record_every: None,
                output: self.out.clone().ok_or_else(|| missing("out"))?,
                risk_seeking_bonus: false,
                workers: None,
            },
        };
        if let Some(instance) = instance {
            config.instance = instance;
        } else if let (Some(seed), InstanceSource::Random { gen_seed, .. }) = (self.gen_seed, &mut config.instance) {
            *gen_seed = seed;
        }
        if let Some(u) = self.utility {
            config.utility = u;
        }
        if let Some(k) = self.episodes {
            config.episodes = k;
        }
        if let Some(d) = self.delta {
            config.delta = DeltaSetting::parse(&d)?;
        }
        if let Some(s) = self.seeds {
            config.seeds = parse_seeds(&s)?;
        }
        if let Some(b) = self.base_seed {
            config.base_seed = b;
        }
        if self.record_every.is_some() {
            config.record_every = self.record_every;
        }
        if let Some(out) = self.out {
            config.output = out;
        }
        config.risk_seeking_bonus |= self.risk_seeking_bonus;
        if self.workers.is_some() {
            config.workers = self.workers;
        }
        Ok(config)
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on data errors, 2 on usage errors.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(CliFailure::Message(text)) => {
            eprint!("{text}");
            1
        }
        Err(CliFailure::Error(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum CliFailure {
    Error(ExperimentError),
    Message(String),
}

impl<E: Into<ExperimentError>> From<E> for CliFailure {
    fn from(e: E) -> Self {
        CliFailure::Error(e.into())
    }
}

fn parse_utility(text: &str) -> Result<UtilitySpec, CliFailure> {
    Ok(text.parse::<UtilitySpec>().map_err(ExperimentError::from)?)
}

fn write_output(path: &std::path::Path, contents: &str) -> Result<(), CliFailure> {
    std::fs::write(path, contents)
        .map_err(|e| ExperimentError::Output { path: path.display().to_string(), message: e.to_string() }.into())
}

fn execute(command: Command) -> Result<String, CliFailure> {
    let mut out = String::new();
    match command {
        Command::GenRandom { states, actions, horizon, seed, out: path } => {
            if states == 0 || actions == 0 || horizon == 0 {
                return Err(ExperimentError::Config("S, A and H must be positive".into()).into());
            }
            let mdp = random_mdp(states, actions, horizon, &mut ChaCha8Rng::seed_from_u64(seed));
            write_output(&path, &mdp.to_json())?;
            let _ = writeln!(out, "wrote {} (digest {})", path.display(), mdp.digest());
        }
        Command::GenHard { hard, out: path } => {
            let (mdp, meta) = hard_instance(&hard.params())?;
            let _ = writeln!(out, "S = {}", meta.states);
            let _ = writeln!(out, "L = {}", meta.leaves);
            let _ = writeln!(out, "p = {}", format_sig(meta.p));
            let _ = writeln!(out, "epsilon = {}", format_sig(meta.epsilon));
            let _ = writeln!(out, "Hbar = {}", meta.hbar);
            if let Some(path) = path {
                write_output(&path, &mdp.to_json_with_meta(Some(&meta.to_json())))?;
                let _ = writeln!(out, "wrote {}", path.display());
            }
        }
        Command::Plan { mdp, utility } => {
            let u = parse_utility(&utility)?;
            let mdp = TabularMDP::load(&mdp)?;
            let (tables, policy) = optimal_plan(&mdp, &u)?;
            let s0 = mdp.s_init();
            let a0 = policy.action(0, s0);
            let _ = writeln!(out, "V1* = {}", format_sig(tables.v(0, s0)));
            let _ = writeln!(out, "initial action: {a0} ({})", mdp.action_name(a0));
            out.push_str("policy:\n");
            for h in 0..mdp.horizon() {
                let row: Vec<String> = (0..mdp.states()).map(|s| mdp.action_name(policy.action(h, s))).collect();
                let _ = writeln!(out, "  h={}: {}", h + 1, row.join(" "));
            }
            out.push_str("Q*:\n");
            for h in 0..mdp.horizon() {
                for s in 0..mdp.states() {
                    let q: Vec<String> = tables.q_row(h, s).iter().map(|&x| format_sig(x)).collect();
                    let _ = writeln!(out, "  h={} {}: {}", h + 1, mdp.state_name(s), q.join(" "));
                }
            }
        }
        Command::Eval { mdp, policy, utility } => {
            let u = parse_utility(&utility)?;
            let mdp = TabularMDP::load(&mdp)?;
            let text = std::fs::read_to_string(&policy).map_err(|e| ExperimentError::Config(format!(
                "cannot read {}: {e}",
                policy.display()
            )))?;
            let policy = Policy::from_json(&text)?;
            let tables = evaluate_policy(&mdp, &u, &policy)?;
            let _ = writeln!(out, "V1 = {}", format_sig(tables.v(0, mdp.s_init())));
        }
        Command::Run(args) => {
            let config = args.into_config()?;
            let outcome = run_experiment(&config)?;
            let _ = writeln!(out, "V1* = {}", format_sig(outcome.vstar));
            let _ = writeln!(
                out,
                "mean cumulative regret at K = {}: {}",
                config.episodes,
                format_sig(*outcome.mean.last().expect("at least one episode"))
            );
            let _ = writeln!(out, "wrote {} and {}", outcome.seed_csv.display(), outcome.mean_csv.display());
        }
        Command::Validate { mdp } => {
            let mdp = TabularMDP::load(&mdp)?;
            match validate(&mdp) {
                Ok(()) => out.push_str("ok\n"),
                Err(violations) => {
                    let mut text = String::new();
                    for v in violations {
                        let _ = writeln!(text, "{v}");
                    }
                    return Err(CliFailure::Message(text));
                }
            }
        }
    }
    Ok(out)
}
