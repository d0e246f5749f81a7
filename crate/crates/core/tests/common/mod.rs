#![allow(dead_code)]

use oce_rl::mdp::TabularMDP;
use oce_rl::oce::{FiniteDistribution, UtilityKind, UtilitySpec};
use rand::Rng;

/// The four standard utilities, with the parameters used throughout the tests.
pub fn standard_utilities() -> Vec<UtilitySpec> {
    vec![
        UtilitySpec::mean(),
        UtilitySpec::entropic(-0.6),
        UtilitySpec::cvar(0.3),
        UtilitySpec::mean_variance(1.0 / 6.0),
    ]
}

/// A wider spread of parameters for property checks.
pub fn utility_family() -> Vec<UtilitySpec> {
    vec![
        UtilitySpec::mean(),
        UtilitySpec::entropic(-0.6),
        UtilitySpec::entropic(-2.5),
        UtilitySpec::cvar(0.1),
        UtilitySpec::cvar(0.5),
        UtilitySpec::cvar(1.0),
        UtilitySpec::mean_variance(1.0 / 6.0),
        UtilitySpec::mean_variance(1.0),
    ]
}

/// Probability vector of length `n`; roughly a third of the entries are zero
/// when `sparse` is set, but at least one entry is positive.
pub fn random_probs<R: Rng>(rng: &mut R, n: usize, sparse: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if sparse && rng.random::<f64>() < 0.35 { 0.0 } else { rng.random::<f64>() })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Support of 1 to `max_len` points with values in `[lo, hi]`. Values are
/// occasionally repeated and occasionally rounded to a coarse grid so that
/// ties and atoms at quantiles show up.
pub fn random_distribution<R: Rng>(rng: &mut R, max_len: usize, lo: f64, hi: f64) -> FiniteDistribution {
    let n = rng.random_range(1..=max_len);
    let coarse = rng.random::<f64>() < 0.3;
    let mut values: Vec<f64> = (0..n)
        .map(|_| {
            let v = rng.random_range(lo..=hi);
            if coarse {
                v.round()
            } else {
                v
            }
        })
        .collect();
    if n > 1 && rng.random::<f64>() < 0.2 {
        values[n - 1] = values[0];
    }
    let probs = random_probs(rng, n, false);
    FiniteDistribution::new(values, probs).expect("valid random distribution")
}

/// Random MDP with dense or sparse rows and uniform rewards, some of them
/// snapped to 0 or 1.
pub fn random_small_mdp<R: Rng>(rng: &mut R, states: usize, actions: usize, horizon: usize) -> TabularMDP {
    let sparse = rng.random::<bool>();
    let p = (0..horizon)
        .map(|_| {
            (0..states)
                .map(|_| (0..actions).map(|_| random_probs(rng, states, sparse)).collect())
                .collect()
        })
        .collect();
    let r = (0..horizon)
        .map(|_| {
            (0..states)
                .map(|_| {
                    (0..actions)
                        .map(|_| match rng.random_range(0..5) {
                            0 => 0.0,
                            1 => 1.0,
                            _ => rng.random::<f64>(),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let s_init = rng.random_range(0..states);
    TabularMDP::new(p, r, s_init).expect("consistent shapes")
}

/// Optimal values under plain expectation, `V[h][s]` with a zero terminal stage.
pub fn risk_neutral_values(mdp: &TabularMDP) -> Vec<Vec<f64>> {
    let (n, h_max) = (mdp.states(), mdp.horizon());
    let mut v = vec![vec![0.0; n]; h_max + 1];
    for h in (0..h_max).rev() {
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            for a in 0..mdp.actions() {
                let future: f64 = mdp.row(h, s, a).iter().zip(&v[h + 1]).map(|(p, x)| p * x).sum();
                best = best.max(mdp.reward(h, s, a) + future);
            }
            v[h][s] = best;
        }
    }
    v
}

/// Lower-tail average: the mean of the worst `alpha` probability mass.
pub fn lower_tail_mean(values: &[f64], probs: &[f64], alpha: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(probs.iter().copied()).filter(|&(_, p)| p > 0.0).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut remaining = alpha;
    let mut acc = 0.0;
    for (v, p) in atoms {
        let take = p.min(remaining);
        acc += take * v;
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    acc / alpha
}

/// Certainty equivalent of the two-point law `{x w.p. q, 0 w.p. 1 - q}`,
/// from the stationary points of the objective on each smooth piece.
pub fn two_point_certainty_equivalent(u: &UtilitySpec, x: f64, q: f64) -> f64 {
    match u.kind {
        UtilityKind::Mean => q * x,
        UtilityKind::Entropic { beta } => (q * (beta * x).exp() + 1.0 - q).ln() / beta,
        UtilityKind::CVaR { alpha } => lower_tail_mean(&[0.0, x], &[1.0 - q, q], alpha),
        UtilityKind::MeanVariance { c } => {
            let f = |l: f64| l + q * u.eval(x - l) + (1.0 - q) * u.eval(-l);
            let kink = x - 1.0 / (2.0 * c);
            let plateau_stationary = if q < 1.0 { q / (2.0 * c * (1.0 - q)) } else { x };
            [0.0, x, q * x, kink, plateau_stationary]
                .into_iter()
                .filter(|l| (0.0..=x).contains(l))
                .map(f)
                .fold(f64::NEG_INFINITY, f64::max)
        }
        UtilityKind::Custom(_) => unimplemented!("two-point oracle covers the standard utilities"),
    }
}

/// Two actions at stage 1: a fair coin between a good and a bad state, or a
/// sure move to a middle state; stage 2 pays 1, 0 and 0.4 respectively.
pub fn risky_vs_safe() -> TabularMDP {
    let n = 4;
    let point = |to: usize| {
        let mut row = vec![0.0; n];
        row[to] = 1.0;
        row
    };
    let mut stage0 = vec![vec![point(0), point(0)]; n];
    stage0[0] = vec![vec![0.0, 0.5, 0.5, 0.0], point(3)];
    let stage1: Vec<Vec<Vec<f64>>> = (0..n).map(|s| vec![point(s), point(s)]).collect();
    let r0 = vec![vec![0.0, 0.0]; n];
    let r1 = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0], vec![0.4, 0.4]];
    TabularMDP::new(vec![stage0, stage1], vec![r0, r1], 0).unwrap().with_names(
        Some(["start", "good", "bad", "mid"].map(String::from).to_vec()),
        Some(vec!["risky".into(), "safe".into()]),
    )
}
