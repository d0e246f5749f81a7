use crate::oce::UtilitySpec;

/// Hoeffding-style exploration bonus scaled by the utility.
///
/// `|u(step - H)| * sqrt(2 ln(S A H K / delta) / max(1, N))`, with an
/// extra factor `S` under the root when `risk_seeking` is set. `step` is
/// 1-based, so the last step of an episode gets no bonus.
#[allow(clippy::too_many_arguments)]
pub fn bonus(
    u: &UtilitySpec,
    step: usize,
    horizon: usize,
    visits: u64,
    states: usize,
    actions: usize,
    episodes: usize,
    delta: f64,
    risk_seeking: bool,
) -> f64 {
    BonusSchedule::new(states, actions, horizon, episodes, delta, risk_seeking).bonus(u, step, visits)
}

/// The bonus with its confidence term precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonusSchedule {
    horizon: usize,
    /// `2 ln(S A H K / delta)`, times `S` for the risk-seeking variant.
    radicand: f64,
}

impl BonusSchedule {
    pub fn new(states: usize, actions: usize, horizon: usize, episodes: usize, delta: f64, risk_seeking: bool) -> Self {
        let count = states as f64 * actions as f64 * horizon as f64 * episodes as f64;
        let mut radicand = 2.0 * (count / delta).ln();
        if risk_seeking {
            radicand *= states as f64;
        }
        Self { horizon, radicand }
    }

    #[inline]
    pub fn bonus(&self, u: &UtilitySpec, step: usize, visits: u64) -> f64 {
        let scale = u.eval(step as f64 - self.horizon as f64).abs();
        scale * (self.radicand / visits.max(1) as f64).sqrt()
    }
}
