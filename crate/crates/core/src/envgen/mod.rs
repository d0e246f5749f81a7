//! Instance generators: random Dirichlet MDPs and the hard tree family.

mod hard;
mod random;

pub use hard::{
    hard_instance, hard_instance_optimal_value, HardInstanceMeta, HardInstanceParams, HardTarget, MAX_HARD_STATES,
};
pub use random::{random_mdp, DIRICHLET_CONCENTRATION, ZERO_REWARD_PROBABILITY};

use thiserror::Error;

use crate::oce::OceError;

#[derive(Debug, Error)]
pub enum EnvGenError {
    #[error("infeasible hard-instance parameters: {0}")]
    HardParams(String),
    #[error(transparent)]
    Oce(#[from] OceError),
}
