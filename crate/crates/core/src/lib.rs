//! Risk-sensitive tabular reinforcement learning with recursive optimized
//! certainty equivalents (OCEs).
//!
//! The crate is organized bottom-up:
//!
//! - [`oce`]: utilities and the certainty equivalent `sup_l { l + E[u(X - l)] }`
//!   over finite distributions, including subgradient weights at the optimizer.
//! - [`mdp`]: non-stationary finite-horizon MDPs, policies and episode sampling.
//! - [`planner`]: exact backward induction for policy evaluation and control.
//! - [`learner`]: the OCE-VI learner with utility-scaled exploration bonuses.
//! - [`envgen`]: random Dirichlet instances and the hard tree family.
//! - [`experiment`]: regret experiments, CSV traces and the CLI plumbing.
//!
//! ```
//! use oce_rl::oce::{oce_eval, FiniteDistribution, UtilitySpec};
//!
//! let coin = FiniteDistribution::uniform(vec![0.0, 1.0]).unwrap();
//! let cvar = oce_eval(&UtilitySpec::cvar(0.5), &coin).unwrap();
//! assert_eq!(cvar.value, 0.0);
//! ```

pub mod envgen;
pub mod experiment;
pub mod learner;
pub mod mdp;
pub mod oce;
pub mod planner;

// The guide's code listings run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/certainty-equivalents.md")]
    mod certainty_equivalents {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/hard-instances.md")]
    mod hard_instances {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
