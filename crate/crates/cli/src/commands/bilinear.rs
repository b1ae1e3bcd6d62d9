use std::collections::BTreeMap;

use anyhow::{anyhow, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use klab::bilinear::{
    operator_norm, saving_sweep, shift_identity_check, type_i_hypotheses, type_ii_hypotheses, Ensemble, SweepSpec,
};
use klab::Error;

use super::{context, echo, require_seed};
use crate::args::{OpnormArgs, ShiftArgs, SweepArgs};
use crate::output::{num, opt, Outcome, Table};

#[derive(Serialize)]
struct SweepSettings {
    q: u64,
    k: usize,
    c: u64,
    #[serde(rename = "M")]
    m: Vec<usize>,
    #[serde(rename = "N")]
    n: Vec<usize>,
    offset: u64,
    ensemble: Vec<&'static str>,
    seed: u64,
    samples: usize,
}

#[derive(Default, Serialize)]
struct EnsembleMax {
    rows: usize,
    max_measured: f64,
    max_measured_over_trivial: f64,
    min_gamma: Option<f64>,
}

pub fn sweep(a: &SweepArgs) -> Result<(Value, Outcome)> {
    let ensembles: Vec<Ensemble> = match &a.ensemble {
        Some(names) => names
            .iter()
            .map(|n| n.parse().map_err(|e: String| anyhow!(e)))
            .collect::<Result<_>>()?,
        None => Ensemble::ALL.to_vec(),
    };
    let s = SweepSettings {
        q: a.q.unwrap_or(1009),
        k: a.k.unwrap_or(2),
        c: a.c.unwrap_or(1),
        m: a.m.clone().unwrap_or_else(|| vec![8, 16, 32]),
        n: a.n.clone().unwrap_or_else(|| vec![8, 16, 32]),
        offset: a.offset.unwrap_or(1),
        ensemble: ensembles.iter().map(|e| e.name()).collect(),
        seed: require_seed(a.seed)?,
        samples: a.samples.unwrap_or(4),
    };
    let ctx = context(s.k, s.q, 1, s.c)?;
    let shapes: Vec<(usize, usize, u64)> =
        s.m.iter().flat_map(|&m| s.n.iter().map(move |&n| (m, n, s.offset))).collect();
    let qf = s.q as f64;
    let mut violations = Vec::new();
    for &(m, n, _) in &shapes {
        let (mf, nf) = (m as f64, n as f64);
        for (label, failed) in [("type II", type_ii_hypotheses(mf, nf, qf)), ("type I", type_i_hypotheses(mf, nf, qf))] {
            if !failed.is_empty() {
                violations.push(format!("M={m} N={n}: {label} hypotheses fail: {}", failed.join(", ")));
            }
        }
    }
    let spec = SweepSpec {
        shapes,
        ensembles,
        samples: s.samples,
        seed: s.seed,
    };
    let reports = saving_sweep(&ctx, &spec)?;
    let mut table = Table::new(&[
        "q", "k", "c", "M", "N", "offset", "ensemble", "seed", "measured", "trivial", "pv", "thm11", "thm12", "gamma",
    ]);
    let mut maxima: BTreeMap<String, EnsembleMax> = BTreeMap::new();
    for r in &reports {
        table.push(vec![
            r.q.to_string(),
            r.k.to_string(),
            r.c.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.offset.to_string(),
            r.ensemble.clone(),
            r.seed.to_string(),
            num(r.measured),
            num(r.trivial),
            num(r.pv),
            opt(r.thm11),
            opt(r.thm12),
            opt(r.gamma),
        ]);
        let e = maxima.entry(r.ensemble.clone()).or_default();
        e.rows += 1;
        e.max_measured = e.max_measured.max(r.measured);
        if r.trivial > 0.0 {
            e.max_measured_over_trivial = e.max_measured_over_trivial.max(r.measured / r.trivial);
        }
        if let Some(g) = r.gamma {
            e.min_gamma = Some(e.min_gamma.map_or(g, |x| x.min(g)));
        }
    }
    let summary = json!({ "seed": s.seed, "rows": reports.len(), "ensembles": maxima });
    Ok((echo(&s)?, Outcome { summary, table, violations }))
}

#[derive(Serialize)]
struct OpnormSettings {
    q: u64,
    k: usize,
    c: u64,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    offset: u64,
}

pub fn opnorm(a: &OpnormArgs) -> Result<(Value, Outcome)> {
    let s = OpnormSettings {
        q: a.q.unwrap_or(499),
        k: a.k.unwrap_or(2),
        c: a.c.unwrap_or(1),
        m: a.m.unwrap_or(22),
        n: a.n.unwrap_or(22),
        offset: a.offset.unwrap_or(1),
    };
    let ctx = context(s.k, s.q, 1, s.c)?;
    let r = operator_norm(&ctx, s.m, s.n, s.offset)?;
    let mn = (s.m * s.n) as f64;
    // unit coefficients: trivial bound is MN, times sup |K| <= k
    let envelope = r.sigma_max * mn.sqrt();
    let k_trivial = s.k as f64 * mn;
    let mut table = Table::new(&[
        "q", "k", "c", "M", "N", "offset", "sigma_max", "iterations", "gap", "sigma_sqrt_mn", "k_trivial",
    ]);
    table.push(vec![
        s.q.to_string(),
        s.k.to_string(),
        s.c.to_string(),
        s.m.to_string(),
        s.n.to_string(),
        s.offset.to_string(),
        num(r.sigma_max),
        r.iterations.to_string(),
        num(r.gap),
        num(envelope),
        num(k_trivial),
    ]);
    let summary = json!({
        "sigma_max": r.sigma_max,
        "iterations": r.iterations,
        "gap": r.gap,
        "sigma_sqrt_mn": envelope,
        "k_trivial": k_trivial,
    });
    Ok((echo(&s)?, Outcome { summary, table, violations: vec![] }))
}

#[derive(Serialize)]
struct ShiftSettings {
    q: u64,
    k: usize,
    c: u64,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "A")]
    a: u64,
    #[serde(rename = "B")]
    b: u64,
    offset: u64,
    seed: u64,
    samples: usize,
}

pub fn shift_check(a: &ShiftArgs) -> Result<(Value, Outcome)> {
    let s = ShiftSettings {
        q: a.q.unwrap_or(101),
        k: a.k.unwrap_or(2),
        c: a.c.unwrap_or(1),
        m: a.m.unwrap_or(5),
        n: a.n.unwrap_or(20),
        a: a.a.unwrap_or(2),
        b: a.b.unwrap_or(3),
        offset: a.offset.unwrap_or(1),
        seed: require_seed(a.seed)?,
        samples: a.samples.unwrap_or(100),
    };
    let ctx = context(s.k, s.q, 1, s.c)?;
    let mut table = Table::new(&["sample", "seed", "deviation"]);
    let mut worst = 0.0f64;
    let mut violations = Vec::new();
    for i in 0..s.samples {
        let seed = s.seed + i as u64;
        let alpha = Ensemble::Steinhaus.sample(s.m, &mut ChaCha8Rng::seed_from_u64(seed));
        match shift_identity_check(&ctx, &alpha, s.offset, s.n, s.a, s.b) {
            Ok(dev) => {
                worst = worst.max(dev);
                table.push(vec![i.to_string(), seed.to_string(), num(dev)]);
            }
            Err(Error::ConstraintViolated(v)) => {
                violations = v;
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let summary = json!({
        "evaluated": table.rows.len(),
        "max_deviation": worst,
        "exact": violations.is_empty() && worst <= 1e-9,
    });
    Ok((echo(&s)?, Outcome { summary, table, violations }))
}
