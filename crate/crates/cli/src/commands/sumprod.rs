use anyhow::{anyhow, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use klab::numeric::log_log_slope;
use klab::sum_product::{
    full_average_moment, noncorrelation_moment, random_distinct_tuple, ratio_scan, scan_bad_tuples,
    second_moment_r_lambda, SampleSpec, ScanThresholds, Statistic,
};

use super::{context, echo, require_seed};
use crate::args::{MomentArgs, ScanArgs};
use crate::output::{num, opt, Outcome, Table};

#[derive(Serialize)]
struct ScanSettings {
    q: Vec<u64>,
    k: Vec<usize>,
    c: u64,
    seed: u64,
    samples: usize,
    statistic: Vec<&'static str>,
    threshold: Option<f64>,
}

pub fn scan(a: &ScanArgs) -> Result<(Value, Outcome)> {
    let stats: Vec<Statistic> = match &a.statistic {
        Some(names) => names
            .iter()
            .map(|n| n.parse().map_err(|e: String| anyhow!(e)))
            .collect::<Result<_>>()?,
        None => Statistic::ALL.to_vec(),
    };
    let s = ScanSettings {
        q: a.q.clone().unwrap_or_else(|| vec![53]),
        k: a.k.clone().unwrap_or_else(|| vec![2]),
        c: a.c.unwrap_or(1),
        seed: require_seed(a.seed)?,
        samples: a.samples.unwrap_or(500),
        statistic: stats.iter().map(|t| t.name()).collect(),
        threshold: a.threshold,
    };
    let mut table = Table::new(&[
        "q", "k", "c", "b1", "b2", "b3", "b4", "s_or_lambda1", "s_or_lambda2", "statistic", "value_re",
        "value_im", "normalized_ratio",
    ]);
    let mut per_stat = Vec::new();
    let mut bad = Vec::new();
    for &k in &s.k {
        let ctxs = s.q.iter().map(|&q| context(k, q, 1, s.c)).collect::<Result<Vec<_>>>()?;
        for &stat in &stats {
            let mut by_q = Vec::new();
            let mut points = Vec::new();
            for ctx in &ctxs {
                let q = ctx.field().q();
                let rep = ratio_scan(ctx, stat, s.samples, s.seed);
                for row in &rep.rows {
                    let mut r: Vec<String> = vec![q.to_string(), k.to_string(), s.c.to_string()];
                    r.extend(row.b.iter().map(|v| v.to_string()));
                    r.extend(row.s_or_lambda.iter().map(|v| v.to_string()));
                    r.extend([
                        stat.name().to_string(),
                        num(row.value.re),
                        num(row.value.im),
                        num(row.ratio),
                    ]);
                    table.push(r);
                }
                points.push((q as f64, rep.max_ratio));
                by_q.push(json!({ "q": q, "max_ratio": rep.max_ratio, "mean_ratio": rep.mean_ratio }));
            }
            per_stat.push(json!({
                "k": k,
                "statistic": stat.name(),
                "normalization_exponent": stat.normalization_exponent(),
                "by_q": by_q,
                "max_ratio_slope": log_log_slope(&points),
            }));
        }
        if let Some(factor) = s.threshold {
            let thresholds = ScanThresholds {
                fixed: None,
                median_factor: factor,
            };
            for ctx in &ctxs {
                bad.push(scan_bad_tuples(ctx, thresholds, SampleSpec::Auto { seed: s.seed })?);
            }
        }
    }
    let summary = json!({
        "seed": s.seed,
        "samples": s.samples,
        "ranges": { "q": s.q, "k": s.k, "c": s.c },
        "statistics": per_stat,
        "bad_tuples": bad,
    });
    Ok((echo(&s)?, Outcome { summary, table, violations: vec![] }))
}

#[derive(Serialize)]
struct MomentSettings {
    q: Vec<u64>,
    k: Vec<usize>,
    d: usize,
    c: u64,
    seed: u64,
    samples: usize,
}

/// Largest field for which the reduced full average is evaluated.
const FULL_AVERAGE_MAX_SIZE: usize = 2_000;

pub fn moments(a: &MomentArgs) -> Result<(Value, Outcome)> {
    let s = MomentSettings {
        q: a.q.clone().unwrap_or_else(|| vec![53]),
        k: a.k.clone().unwrap_or_else(|| vec![2]),
        d: a.d.unwrap_or(1),
        c: a.c.unwrap_or(1),
        seed: require_seed(a.seed)?,
        samples: a.samples.unwrap_or(20),
    };
    let mut table = Table::new(&[
        "q", "d", "k", "b1", "b2", "b3", "b4", "second_moment", "c_ratio", "noncorrelation_abs",
    ]);
    let mut groups = Vec::new();
    for &k in &s.k {
        let mut points = Vec::new();
        let mut by_q = Vec::new();
        for &q in &s.q {
            let ctx = context(k, q, s.d, s.c)?;
            let f = ctx.field();
            let qd = f.size() as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            let mut worst = 0.0f64;
            let mut total = 0.0;
            for _ in 0..s.samples {
                let b = random_distinct_tuple(&mut rng, f);
                let m2 = second_moment_r_lambda(&ctx, &b)?;
                let ratio = (m2 - qd).abs() / qd.sqrt();
                let nc = (k % 2 == 1).then(|| noncorrelation_moment(&ctx, &b)).transpose()?;
                worst = worst.max(ratio);
                total += ratio;
                let mut r = vec![q.to_string(), s.d.to_string(), k.to_string()];
                r.extend(b.iter().map(|v| v.0.to_string()));
                r.extend([num(m2), num(ratio), opt(nc.map(|z| z.norm()))]);
                table.push(r);
            }
            let full = (f.size() <= FULL_AVERAGE_MAX_SIZE).then(|| full_average_moment(&ctx)).transpose()?;
            points.push((qd, worst));
            by_q.push(json!({
                "q": q,
                "max_c_ratio": worst,
                "mean_c_ratio": if s.samples > 0 { total / s.samples as f64 } else { 0.0 },
                "full_average_moment": full,
            }));
        }
        groups.push(json!({ "k": k, "d": s.d, "by_q": by_q, "max_c_ratio_slope": log_log_slope(&points) }));
    }
    let summary = json!({ "seed": s.seed, "samples": s.samples, "groups": groups });
    Ok((echo(&s)?, Outcome { summary, table, violations: vec![] }))
}
