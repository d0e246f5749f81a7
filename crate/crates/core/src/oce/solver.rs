//! Evaluation of `OCE(X) = sup_l { l + E[u(X - l)] }` on finite distributions.
//!
//! The objective is concave in `l` for a concave `u` (convex for a convex
//! `u`), and an optimizer always lies in the support hull of `X`. Table
//! utilities use closed forms; anything else goes through golden-section
//! search on the hull.

use super::distribution::FiniteDistribution;
use super::utility::{Mode, UtilityKind, UtilitySpec};
use super::OceError;

/// Inverse golden ratio `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_GOLDEN_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    ClosedForm,
    GoldenSection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OceResult {
    pub value: f64,
    /// An optimizer of the allocation parameter, inside the support hull.
    pub lambda_star: f64,
    pub solver: Solver,
}

/// `l + E[u(X - l)]`.
pub fn oce_objective(u: &UtilitySpec, dist: &FiniteDistribution, lambda: f64) -> f64 {
    lambda + dist.expect(|x| u.eval(x - lambda))
}

/// Certainty equivalent of `dist` under `u`, closed form when one applies.
pub fn oce_eval(u: &UtilitySpec, dist: &FiniteDistribution) -> Result<OceResult, OceError> {
    u.validate()?;
    let (lo, hi) = dist.hull();
    if lo == hi {
        return Ok(OceResult { value: lo, lambda_star: lo, solver: Solver::ClosedForm });
    }
    let closed = match &u.kind {
        UtilityKind::Mean => {
            let m = dist.mean().clamp(lo, hi);
            Some((m, m))
        }
        UtilityKind::Entropic { beta } => {
            let ce = entropic_certainty_equivalent(*beta, dist).clamp(lo, hi);
            Some((ce, ce))
        }
        UtilityKind::CVaR { alpha } => Some(cvar_rockafellar_uryasev(*alpha, dist)),
        UtilityKind::MeanVariance { c } => {
            let m = dist.mean();
            // Closed form needs every outcome inside the quadratic branch.
            if hi - m <= 0.5 / c {
                Some((m - c * dist.variance(), m.clamp(lo, hi)))
            } else {
                None
            }
        }
        UtilityKind::Custom(_) => None,
    };
    match closed {
        Some((value, lambda_star)) => Ok(OceResult { value, lambda_star, solver: Solver::ClosedForm }),
        None => Ok(oce_golden_unchecked(u, dist)),
    }
}

/// Certainty equivalent through the generic golden-section solver only.
pub fn oce_golden(u: &UtilitySpec, dist: &FiniteDistribution) -> Result<OceResult, OceError> {
    u.validate()?;
    Ok(oce_golden_unchecked(u, dist))
}

fn oce_golden_unchecked(u: &UtilitySpec, dist: &FiniteDistribution) -> OceResult {
    let (lo, hi) = dist.hull();
    let scale = dist.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * (1.0 + scale);
    let sign = match u.mode {
        Mode::RiskAverse => 1.0,
        Mode::RiskSeeking => -1.0,
    };
    let (_, best) = golden_section_max(|l| sign * oce_objective(u, dist, l), lo, hi, tol);
    let lambda_star = polish_optimizer(u, dist, sign);
    let value = best.max(sign * oce_objective(u, dist, lambda_star));
    OceResult { value: sign * value, lambda_star, solver: Solver::GoldenSection }
}

/// Bisection on the right derivative of the objective, `1 - E[u'_-(X - l)]`.
///
/// Near the optimum the objective is flat to within rounding, so the
/// golden-section argmax is only accurate to roughly the square root of
/// machine precision. The derivative keeps its sign information there.
fn polish_optimizer(u: &UtilitySpec, dist: &FiniteDistribution, sign: f64) -> f64 {
    let (mut a, mut b) = dist.hull();
    let ascending = |l: f64| sign * (1.0 - dist.expect(|x| u.left_derivative(x - l))) > 0.0;
    for _ in 0..MAX_GOLDEN_ITERS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if ascending(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    b
}

/// Maximizes a unimodal `f` on `[a, b]` until the bracket is narrower than `tol`.
///
/// Returns `(argmax, max)`. The original endpoints are also compared so a
/// maximizer sitting on the boundary is returned exactly.
pub fn golden_section_max<F>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (a0, b0) = (a, b);
    let (mut a, mut b) = (a, b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_GOLDEN_ITERS {
        if b - a <= tol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [x1, x2, a0, b0] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// `(1/beta) log E[exp(beta X)]`, shifted by the largest exponent.
fn entropic_certainty_equivalent(beta: f64, dist: &FiniteDistribution) -> f64 {
    let shift = dist.support().map(|(v, _)| beta * v).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = dist.support().map(|(v, p)| p * (beta * v - shift).exp()).sum();
    (shift + sum.ln()) / beta
}

/// Rockafellar-Uryasev value at the lower alpha-quantile; returns `(value, quantile)`.
fn cvar_rockafellar_uryasev(alpha: f64, dist: &FiniteDistribution) -> (f64, f64) {
    let mut atoms: Vec<(f64, f64)> = dist.support().collect();
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut cum = 0.0;
    let mut q = atoms[atoms.len() - 1].0;
    for &(v, p) in &atoms {
        cum += p;
        if cum >= alpha - 1e-12 {
            q = v;
            break;
        }
    }
    let shortfall: f64 = atoms.iter().map(|&(v, p)| p * (q - v).max(0.0)).sum();
    (q - shortfall / alpha, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> FiniteDistribution {
        FiniteDistribution::uniform(vec![0.0, 1.0]).unwrap()
    }

    /// Brute-force grid over the hull; independent of the closed forms.
    fn grid_oce(u: &UtilitySpec, d: &FiniteDistribution, step: f64) -> f64 {
        let (lo, hi) = d.hull();
        let n = ((hi - lo) / step).round() as usize;
        (0..=n)
            .map(|i| oce_objective(u, d, lo + i as f64 * step))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn point_mass_is_consistent() {
        for u in [UtilitySpec::mean(), UtilitySpec::entropic(-2.0), UtilitySpec::cvar(0.1)] {
            let r = oce_eval(&u, &FiniteDistribution::point_mass(5.0)).unwrap();
            assert_eq!(r.value, 5.0);
            assert_eq!(r.lambda_star, 5.0);
        }
    }

    #[test]
    fn mean_of_fair_coin() {
        assert_eq!(oce_eval(&UtilitySpec::mean(), &two_point()).unwrap().value, 0.5);
    }

    #[test]
    fn cvar_uniform_four() {
        let d = FiniteDistribution::uniform(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let u = UtilitySpec::cvar(0.5);
        let oracle = grid_oce(&u, &d, 1e-4);
        assert!((oracle - 1.5).abs() < 1e-9);
        let r = oce_eval(&u, &d).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);
        assert_eq!(r.lambda_star, 2.0);
        assert_eq!(r.solver, Solver::ClosedForm);
    }

    #[test]
    fn entropic_fair_coin() {
        let u = UtilitySpec::entropic(-1.0);
        let expected = -(0.5 + 0.5 * (-1.0_f64).exp()).ln();
        assert!((expected - 0.379885).abs() < 1e-6);
        assert!((grid_oce(&u, &two_point(), 1e-5) - expected).abs() < 1e-9);
        let r = oce_eval(&u, &two_point()).unwrap();
        assert!((r.value - expected).abs() < 1e-14);
    }

    #[test]
    fn mean_variance_fair_coin() {
        let u = UtilitySpec::mean_variance(0.25);
        assert!((grid_oce(&u, &two_point(), 1e-4) - 0.4375).abs() < 1e-9);
        let r = oce_eval(&u, &two_point()).unwrap();
        assert_eq!(r.solver, Solver::ClosedForm);
        assert!((r.value - 0.4375).abs() < 1e-15);
    }

    #[test]
    fn mean_variance_outside_quadratic_region_falls_back() {
        let u = UtilitySpec::mean_variance(1.0);
        // max - mean = 9 > 1/(2c), closed form would be wrong
        let d = FiniteDistribution::new(vec![0.0, 10.0], vec![0.9, 0.1]).unwrap();
        let r = oce_eval(&u, &d).unwrap();
        assert_eq!(r.solver, Solver::GoldenSection);
        let naive = d.mean() - d.variance();
        assert!(r.value > naive + 1.0);
        assert!((r.value - grid_oce(&u, &d, 1e-5)).abs() < 1e-8);
    }

    #[test]
    fn golden_matches_closed_forms_on_examples() {
        let d = FiniteDistribution::new(vec![0.0, 2.0, 7.0], vec![0.2, 0.5, 0.3]).unwrap();
        for u in [
            UtilitySpec::mean(),
            UtilitySpec::entropic(-0.6),
            UtilitySpec::entropic(0.4),
            UtilitySpec::cvar(0.35),
            UtilitySpec::mean_variance(0.05),
        ] {
            let a = oce_eval(&u, &d).unwrap();
            let b = oce_golden(&u, &d).unwrap();
            assert_eq!(a.solver, Solver::ClosedForm, "{u}");
            assert!((a.value - b.value).abs() < 1e-8, "{u}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn risk_seeking_entropic_exceeds_mean() {
        let u = UtilitySpec::entropic(1.0);
        let r = oce_eval(&u, &two_point()).unwrap();
        assert!(r.value > 0.5);
        assert!((r.value - (0.5 + 0.5 * 1.0_f64.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let u = UtilitySpec::cvar(0.5).with_mode(Mode::RiskSeeking);
        assert!(oce_eval(&u, &two_point()).is_err());
    }

    #[test]
    fn golden_section_finds_boundary_maximum() {
        let (x, fx) = golden_section_max(|x| x, 0.0, 3.0, 1e-12);
        assert_eq!(x, 3.0);
        assert_eq!(fx, 3.0);
    }
}
