//! Regret experiments over many seeds, CSV output, and the command line.

mod cli;
mod config;
mod run;

pub use cli::cli_dispatch;
pub use config::{mean_path, parse_seeds, DeltaSetting, ExperimentConfig, InstanceSource, WORKERS_ENV};
pub use run::{
    build_instance, format_sig, mean_cumulative, recorded_episodes, run_experiment, run_seeds, ExperimentOutcome,
    ALGO_NAME, MEAN_HEADER, SEED_HEADER,
};

use thiserror::Error;

use crate::envgen::EnvGenError;
use crate::learner::LearnerError;
use crate::mdp::MdpError;
use crate::oce::OceError;
use crate::planner::PlanError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("instance failed validation: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
    #[error(transparent)]
    Oce(#[from] OceError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    EnvGen(#[from] EnvGenError),
}
