use anyhow::Result;
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use klab::divisor_app::{
    congruence_violations, critical_delta, deligne_violations, eta_from_delta, exponent_case_analysis,
    hecke_violations, progression_scan, slack_sensitivity, tau_table, ExponentConfig, DEFAULT_GRID_STEP,
    DEFAULT_KAPPA,
};
use klab::numeric::log_log_slope;
use klab::Error;

use super::echo;
use crate::args::{ExponentArgs, ProgressionArgs};
use crate::output::{num, opt, Outcome, Table};

#[derive(Serialize)]
struct ProgressionSettings {
    x: usize,
    q: Vec<u64>,
}

pub fn progression(a: &ProgressionArgs) -> Result<(Value, Outcome)> {
    let s = ProgressionSettings {
        x: a.x.unwrap_or(50_000),
        q: a.q.clone().unwrap_or_else(|| vec![53, 101, 199]),
    };
    let coeffs = tau_table(s.x)?;
    let mut table = Table::new(&["x", "q", "a", "raw", "main", "E", "normalized"]);
    let mut by_q = Vec::new();
    let mut points = Vec::new();
    for &q in &s.q {
        let scan = progression_scan(&coeffs, s.x, q)?;
        for r in &scan.reports {
            table.push(vec![
                r.x.to_string(),
                r.q.to_string(),
                r.a.to_string(),
                num(r.raw),
                num(r.main),
                num(r.e),
                num(r.normalized),
            ]);
        }
        points.push((q as f64, scan.max_normalized));
        by_q.push(json!({
            "q": q,
            "max_abs_normalized": scan.max_normalized,
            "exact_sum_is_zero": scan.exact_sum.is_zero(),
        }));
    }
    let summary = json!({
        "x": s.x,
        "by_q": by_q,
        "max_normalized_slope": log_log_slope(&points),
        "coefficient_checks": {
            "n_max": s.x,
            "hecke_violations": hecke_violations(&coeffs).len(),
            "deligne_violations": deligne_violations(&coeffs).len(),
            "congruence_691_violations": congruence_violations(&coeffs).len(),
        },
    });
    Ok((echo(&s)?, Outcome { summary, table, violations: vec![] }))
}

#[derive(Serialize)]
struct ExponentSettings {
    delta: Option<f64>,
    eta: Option<f64>,
    kappa: f64,
    grid: f64,
    slack: f64,
    search: bool,
}

const SENSITIVITY_SLACKS: [f64; 4] = [0.0, 1e-3, 5e-3, 1e-2];

pub fn exponent_lp(a: &ExponentArgs) -> Result<(Value, Outcome)> {
    let s = ExponentSettings {
        delta: a.delta,
        eta: a.eta,
        kappa: a.kappa.unwrap_or(DEFAULT_KAPPA),
        grid: a.grid.unwrap_or(DEFAULT_GRID_STEP),
        slack: a.slack.unwrap_or(0.0),
        search: a.search || (a.delta.is_none() && a.eta.is_none()),
    };
    let mut table = Table::new(&[
        "delta", "eta", "kappa", "slack", "pass", "max_min_exponent", "argmax_mu", "argmax_nu", "delta_star", "eta_star",
    ]);
    let mut violations = Vec::new();
    let mut analysis = None;
    if s.delta.is_some() || s.eta.is_some() {
        match ExponentConfig::new(s.delta, s.eta, s.kappa, s.grid, s.slack) {
            Ok(cfg) => analysis = Some(exponent_case_analysis(&cfg)),
            Err(Error::HypothesisViolated(v)) => violations = v,
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(an) = analysis.as_ref().filter(|an| !an.pass) {
        violations.push(format!(
            "case analysis fails at delta = {}: max-min exponent {} at (mu, nu) = ({}, {})",
            an.config.delta, an.max_min_exponent, an.argmax.0, an.argmax.1
        ));
    }
    let delta_star = match &analysis {
        Some(an) => an.delta_star,
        None => critical_delta(s.kappa, s.slack),
    };
    let eta_star = eta_from_delta(delta_star);
    let row_delta = analysis.as_ref().map(|an| an.config.delta);
    table.push(vec![
        opt(row_delta),
        opt(analysis.as_ref().map(|an| an.config.eta)),
        num(s.kappa),
        num(s.slack),
        analysis.as_ref().map(|an| an.pass.to_string()).unwrap_or_default(),
        opt(analysis.as_ref().map(|an| an.max_min_exponent)),
        opt(analysis.as_ref().map(|an| an.argmax.0)),
        opt(analysis.as_ref().map(|an| an.argmax.1)),
        num(delta_star),
        num(eta_star),
    ]);
    let sensitivity = s.search.then(|| slack_sensitivity(s.kappa, &SENSITIVITY_SLACKS));
    let summary = json!({
        "kappa": s.kappa,
        "slack": s.slack,
        "delta_star": delta_star,
        "eta_star": eta_star,
        "analysis": analysis,
        "slack_sensitivity": sensitivity,
    });
    Ok((echo(&s)?, Outcome { summary, table, violations }))
}
