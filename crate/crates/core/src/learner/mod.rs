//! The OCE-VI learner: empirical model, exploration bonus, optimistic
//! backups, the learning loop, and tilted transitions used to linearize the
//! certainty equivalent.

mod bonus;
mod model;
mod ocevi;
mod tilted;

pub use bonus::{bonus, BonusSchedule};
pub use model::{empirical_transition, EmpiricalModel, StateDistribution};
pub use ocevi::{
    default_delta, optimistic_backup, run_ocevi, run_ocevi_observed, EpisodeView, LearnerConfig, RegretRecord,
    RegretTrace, TraceMeta,
};
pub use tilted::tilted_transition;

use thiserror::Error;

use crate::oce::OceError;
use crate::planner::PlanError;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("(h={h}, s={s}, a={a}) has not been visited")]
    Unvisited { h: usize, s: usize, a: usize },
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error("invalid tilt: {0}")]
    Tilt(String),
    #[error(transparent)]
    Oce(#[from] OceError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}
