//! Exponent-level case analysis for the level of distribution of `lambda_f * 1`.
//!
//! With `x = q^{2-delta}` and dyadic ranges `M' = q^{mu'}`, `N' = q^{nu'}`, each
//! available estimate gives an upper bound `q^{tau(mu', nu')}` for the sum
//! `S(M', N')`. The argument succeeds when the best of them stays below
//! `1 - kappa` everywhere on the feasible region
//!
//! ```text
//! mu', nu' >= 0,   1 <= mu' + nu' <= 1 + delta,   nu' <= 1,   mu' <= 2.
//! ```
//!
//! Every bound is piecewise linear, so the supremum over the region of their
//! minimum is attained at a vertex of the line arrangement formed by the region
//! edges, the breakpoints of each bound, the pairwise equality lines and the
//! applicability line `mu' = 2 nu'`. [`max_min_exponent`] enumerates those
//! vertices exactly; a grid scan is kept as an independent check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default loss `kappa` used by the critical-`delta` search.
pub const DEFAULT_KAPPA: f64 = 1e-4;
pub const DEFAULT_GRID_STEP: f64 = 1e-3;

/// The five exponent bounds at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentBounds {
    pub pv: f64,
    pub fkm1: f64,
    pub type_ii_pv1: f64,
    pub type_ii_pv2: f64,
    /// `None` when `0 <= mu' <= 2 nu'` fails.
    pub type_i: Option<f64>,
    /// Whether the point lies in the feasible region (no slack).
    pub feasible: bool,
}

impl ExponentBounds {
    pub fn min(&self) -> f64 {
        let four = self.pv.min(self.fkm1).min(self.type_ii_pv1).min(self.type_ii_pv2);
        self.type_i.map_or(four, |t| four.min(t))
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.pv,
            self.fkm1,
            self.type_ii_pv1,
            self.type_ii_pv2,
            self.type_i.unwrap_or(f64::INFINITY),
        ]
    }
}

/// Feasible-region membership with `slack` added to the upper constraints.
pub fn in_region(mu: f64, nu: f64, delta: f64, slack: f64) -> bool {
    const TOL: f64 = 1e-12;
    let s = mu + nu;
    mu >= -TOL
        && nu >= -TOL
        && s >= 1.0 - TOL
        && s <= 1.0 + delta + slack + TOL
        && nu <= 1.0 + slack + TOL
        && mu <= 2.0 + slack + TOL
}

pub fn bound_exponents(mu: f64, nu: f64, delta: f64) -> ExponentBounds {
    let s = mu + nu;
    ExponentBounds {
        pv: s + (-1.0f64).max(0.5 - nu),
        fkm1: s + (-0.125f64).max(0.375 - mu / 2.0),
        type_ii_pv1: s + (-mu / 2.0).max(0.25 - nu / 2.0),
        type_ii_pv2: s + (-nu / 2.0).max(0.25 - mu / 2.0),
        type_i: (mu >= 0.0 && mu <= 2.0 * nu).then(|| s + 0.25 - mu / 6.0 - 5.0 * nu / 12.0),
        feasible: in_region(mu, nu, delta, 0.0),
    }
}

/// Supremum of the best bound near `(mu, nu)`: where the type I bound stops
/// applying the limit is taken from the inapplicable side.
fn sup_value(mu: f64, nu: f64, delta: f64) -> f64 {
    let b = bound_exponents(mu, nu, delta);
    if mu < 2.0 * nu - 1e-12 {
        b.min()
    } else {
        ExponentBounds { type_i: None, ..b }.min()
    }
}

/// A line `a mu' + b nu' = c`.
type Line = (f64, f64, f64);

/// Linear pieces `p mu' + r nu' + c` of the five bounds.
const PIECES: [(f64, f64, f64); 9] = [
    (1.0, 1.0, -1.0),
    (1.0, 0.0, 0.5),
    (1.0, 1.0, -0.125),
    (0.5, 1.0, 0.375),
    (0.5, 1.0, 0.0),
    (1.0, 0.5, 0.25),
    (1.0, 0.5, 0.0),
    (0.5, 1.0, 0.25),
    (5.0 / 6.0, 7.0 / 12.0, 0.25),
];

fn arrangement(delta: f64, slack: f64) -> Vec<Line> {
    let mut lines: Vec<Line> = vec![
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (1.0, 1.0, 1.0),
        (1.0, 1.0, 1.0 + delta + slack),
        (0.0, 1.0, 1.0 + slack),
        (1.0, 0.0, 2.0 + slack),
        (1.0, -2.0, 0.0),
    ];
    for i in 0..PIECES.len() {
        for j in i + 1..PIECES.len() {
            let (a, b, c) = (
                PIECES[i].0 - PIECES[j].0,
                PIECES[i].1 - PIECES[j].1,
                PIECES[j].2 - PIECES[i].2,
            );
            if a.abs() > 1e-15 || b.abs() > 1e-15 {
                lines.push((a, b, c));
            }
        }
    }
    lines
}

/// Exact supremum over the feasible region of the best bound, and where it
/// is attained.
pub fn max_min_exponent(delta: f64, slack: f64) -> (f64, (f64, f64)) {
    let lines = arrangement(delta, slack);
    let mut best = (f64::NEG_INFINITY, (f64::NAN, f64::NAN));
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-14 {
                continue;
            }
            let mu = (c1 * b2 - c2 * b1) / det;
            let nu = (a1 * c2 - a2 * c1) / det;
            if !in_region(mu, nu, delta, slack) {
                continue;
            }
            let v = sup_value(mu, nu, delta);
            if v > best.0 {
                best = (v, (mu, nu));
            }
        }
    }
    best
}

fn grid_points(delta: f64, slack: f64, step: f64) -> Vec<(f64, f64)> {
    let top = 1.0 + delta + slack;
    let mu_max = 2.0 + slack;
    let nu_max = 1.0 + slack;
    let steps = (mu_max / step).ceil() as usize;
    let mut pts = Vec::new();
    for i in 0..=steps {
        let mu = (i as f64 * step).min(mu_max);
        let lo = (1.0 - mu).max(0.0);
        let hi = (top - mu).min(nu_max);
        if hi < lo {
            continue;
        }
        let n = ((hi - lo) / step).ceil() as usize;
        for j in 0..=n {
            pts.push((mu, (lo + j as f64 * step).min(hi)));
        }
    }
    pts
}

/// Grid maximum of the best bound, evaluated with the strict applicability rule.
pub fn grid_max_min(delta: f64, slack: f64, step: f64) -> (f64, (f64, f64)) {
    grid_points(delta, slack, step)
        .into_par_iter()
        .map(|(mu, nu)| (bound_exponents(mu, nu, delta).min(), (mu, nu)))
        .reduce(
            || (f64::NEG_INFINITY, (f64::NAN, f64::NAN)),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        )
}

/// `delta`, `eta`, `kappa`, grid step and slack for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub delta: f64,
    pub eta: f64,
    pub kappa: f64,
    pub grid_step: f64,
    pub slack: f64,
}

/// `eta = delta / (4 - 2 delta)`, from `q = x^{1/2 + eta}` and `x = q^{2 - delta}`.
pub fn eta_from_delta(delta: f64) -> f64 {
    delta / (4.0 - 2.0 * delta)
}

pub fn delta_from_eta(eta: f64) -> f64 {
    4.0 * eta / (1.0 + 2.0 * eta)
}

impl ExponentConfig {
    /// At least one of `delta`, `eta` must be given; when both are, they must agree.
    pub fn new(delta: Option<f64>, eta: Option<f64>, kappa: f64, grid_step: f64, slack: f64) -> Result<Self> {
        let mut bad = Vec::new();
        let delta = match (delta, eta) {
            (Some(d), Some(e)) => {
                if (d - delta_from_eta(e)).abs() > 1e-12 {
                    bad.push(format!("delta = {d} inconsistent with eta = {e}"));
                }
                d
            }
            (Some(d), None) => d,
            (None, Some(e)) => delta_from_eta(e),
            (None, None) => {
                bad.push("delta or eta required".to_string());
                0.0
            }
        };
        if !(grid_step > 0.0 && grid_step <= 1e-3) {
            bad.push("0 < grid step <= 1e-3".to_string());
        }
        if !(kappa >= 0.0 && slack >= 0.0 && (0.0..2.0).contains(&delta)) {
            bad.push("kappa, slack >= 0 and 0 <= delta < 2".to_string());
        }
        if !bad.is_empty() {
            return Err(Error::HypothesisViolated(bad));
        }
        Ok(ExponentConfig {
            delta,
            eta: eta_from_delta(delta),
            kappa,
            grid_step,
            slack,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentWitness {
    pub mu: f64,
    pub nu: f64,
    pub best: f64,
    pub bounds: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentAnalysis {
    pub config: ExponentConfig,
    pub pass: bool,
    /// Exact supremum of the best bound over the region.
    pub max_min_exponent: f64,
    pub argmax: (f64, f64),
    pub grid_max_min: f64,
    /// Points where every bound exceeds `1 - kappa`; empty on success.
    pub witnesses: Vec<ExponentWitness>,
    pub delta_star: f64,
    pub eta_star: f64,
    pub replacements_hold: bool,
}

fn passes(delta: f64, kappa: f64, slack: f64) -> bool {
    max_min_exponent(delta, slack).0 <= 1.0 - kappa
}

/// Supremal `delta` in `[0, 1/2]` at which the analysis passes, by bisection.
pub fn critical_delta(kappa: f64, slack: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 0.5);
    if !passes(lo, kappa, slack) {
        return 0.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if passes(mid, kappa, slack) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Checks on the grid that replacing the first two bounds by
/// `mu' + 1/2` and `(mu'+nu')/2 + nu'/2 + 3/8` only loses where the discarded
/// piece is itself below 1.
pub fn replacements_hold(delta: f64, slack: f64, step: f64) -> bool {
    let cap = 1.0 + delta + slack - 0.125;
    cap < 1.0
        && grid_points(delta, slack, step).into_par_iter().all(|(mu, nu)| {
            let b = bound_exponents(mu, nu, delta);
            let s = mu + nu;
            b.pv <= (mu + 0.5).max(s - 1.0) + 1e-12
                && s - 1.0 < 1.0
                && b.fkm1 <= (s / 2.0 + nu / 2.0 + 0.375).max(cap) + 1e-12
        })
}

pub fn exponent_case_analysis(config: &ExponentConfig) -> ExponentAnalysis {
    let ExponentConfig {
        delta,
        kappa,
        grid_step,
        slack,
        ..
    } = *config;
    let (exact, argmax) = max_min_exponent(delta, slack);
    let (grid, _) = grid_max_min(delta, slack, grid_step);
    let threshold = 1.0 - kappa;
    let pass = exact.max(grid) <= threshold;
    let mut witnesses = Vec::new();
    if !pass {
        let mut cands: Vec<(f64, f64)> = vec![argmax];
        cands.extend(
            grid_points(delta, slack, grid_step)
                .into_iter()
                .filter(|&(mu, nu)| bound_exponents(mu, nu, delta).min() > threshold),
        );
        for (mu, nu) in cands {
            let b = bound_exponents(mu, nu, delta);
            let best = sup_value(mu, nu, delta);
            if best > threshold {
                witnesses.push(ExponentWitness {
                    mu,
                    nu,
                    best,
                    bounds: b.as_array(),
                });
            }
        }
        witnesses.sort_by(|a, b| b.best.total_cmp(&a.best).then(a.mu.total_cmp(&b.mu)));
        witnesses.truncate(10);
    }
    let delta_star = critical_delta(kappa, slack);
    ExponentAnalysis {
        config: *config,
        pass,
        max_min_exponent: exact,
        argmax,
        grid_max_min: grid,
        witnesses,
        delta_star,
        eta_star: eta_from_delta(delta_star),
        replacements_hold: replacements_hold(delta, slack, grid_step),
    }
}

/// `delta*` for each slack value.
pub fn slack_sensitivity(kappa: f64, slacks: &[f64]) -> Vec<(f64, f64)> {
    slacks.iter().map(|&s| (s, critical_delta(kappa, s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        let b = bound_exponents(0.75, 0.75, 0.0);
        assert!((b.type_i.unwrap() - 1.3125).abs() < 1e-12);
        assert!(bound_exponents(0.9, 0.4, 0.0).type_i.is_none());
        // on the region PV reduces to mu' + 1/2
        let b = bound_exponents(0.4, 0.62, 0.03);
        assert!(b.feasible);
        assert!((b.pv - 0.9).abs() < 1e-12);
    }

    #[test]
    fn critical_values() {
        let d = critical_delta(DEFAULT_KAPPA, 0.0);
        assert!((d - 1.0 / 26.0).abs() < 1e-3, "{d}");
        assert!((eta_from_delta(d) - 1.0 / 102.0).abs() < 1e-3);
        assert!((eta_from_delta(1.0 / 26.0) - 1.0 / 102.0).abs() < 1e-15);
        // exact value on the top edge at the type I boundary case
        let (v, _) = max_min_exponent(0.02, 0.0);
        assert!(v >= 23.0 / 24.0 + 13.0 * 0.02 / 12.0 - 1e-12);
    }

    #[test]
    fn pass_and_fail() {
        let ok = exponent_case_analysis(&ExponentConfig::new(Some(0.03), None, 1e-3, 1e-3, 0.0).unwrap());
        assert!(ok.pass && ok.witnesses.is_empty());
        assert!(ok.replacements_hold);
        assert!(ok.grid_max_min <= ok.max_min_exponent + 1e-12);
        let bad = exponent_case_analysis(&ExponentConfig::new(Some(0.05), None, 1e-3, 1e-3, 0.0).unwrap());
        assert!(!bad.pass);
        let w = bad.witnesses[0];
        assert!(w.bounds.iter().all(|&b| b > 1.0 - 1e-3) || w.mu >= 2.0 * w.nu);
    }

    #[test]
    fn config_validation() {
        assert!(ExponentConfig::new(Some(0.03), Some(0.2), 1e-3, 1e-3, 0.0).is_err());
        let c = ExponentConfig::new(None, Some(1.0 / 102.0), 1e-3, 1e-3, 0.0).unwrap();
        assert!((c.delta - 1.0 / 26.0).abs() < 1e-12);
        assert!(ExponentConfig::new(Some(0.03), None, 1e-3, 1e-2, 0.0).is_err());
    }
}
