use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use klab::kloosterman::{conjugation_symmetry_check, pullback_scale};
use klab::{kloosterman_naive, SignConvention};

use super::{echo, field, load_table, parse_sign};
use crate::args::{KlCheckArgs, KlTableArgs};
use crate::output::{num, Outcome, Table};

#[derive(Serialize)]
struct TableSettings {
    q: Vec<u64>,
    k: Vec<usize>,
    d: usize,
    c: u64,
    sign: &'static str,
}

pub fn kl_table(a: &KlTableArgs) -> Result<(Value, Outcome)> {
    let sign = parse_sign(a.sign.as_deref())?;
    let s = TableSettings {
        q: a.q.clone().unwrap_or_else(|| vec![101]),
        k: a.k.clone().unwrap_or_else(|| vec![2]),
        d: a.d.unwrap_or(1),
        c: a.c.unwrap_or(1),
        sign: sign.name(),
    };
    let mut table = Table::new(&["q", "d", "k", "c", "a", "re", "im", "abs"]);
    let mut summary = Vec::new();
    for &q in &s.q {
        let f = field(q, s.d)?;
        for &k in &s.k {
            let mut t = load_table(k, f.clone(), sign)?;
            if s.c != 1 {
                t = pullback_scale(&t, f.embed(s.c))?;
            }
            for (a, v) in t.values().iter().enumerate() {
                table.push(vec![
                    q.to_string(),
                    s.d.to_string(),
                    k.to_string(),
                    s.c.to_string(),
                    a.to_string(),
                    num(v.re),
                    num(v.im),
                    num(v.norm()),
                ]);
            }
            let cs = t.complete_sum();
            summary.push(json!({
                "q": q, "d": s.d, "k": k,
                "size": t.values().len(),
                "max_abs": t.max_abs(),
                "complete_sum": [cs.re, cs.im],
                "tolerance": t.tolerance(),
            }));
        }
    }
    Ok((echo(&s)?, Outcome { summary: json!({ "tables": summary }), table, violations: vec![] }))
}

#[derive(Serialize)]
struct CheckSettings {
    q: Vec<u64>,
    k: Vec<usize>,
    d: usize,
    naive_cap: u64,
}

pub fn kl_check(a: &KlCheckArgs) -> Result<(Value, Outcome)> {
    let s = CheckSettings {
        q: a.q.clone().unwrap_or_else(|| vec![101]),
        k: a.k.clone().unwrap_or_else(|| vec![2, 3, 4]),
        d: a.d.unwrap_or(1),
        naive_cap: a.naive_cap.unwrap_or(100_000_000),
    };
    let mut table = Table::new(&[
        "q", "d", "k", "max_abs", "conj_dev", "collapse_err", "collapse_tol", "naive_max_dev", "pass",
    ]);
    let mut violations = Vec::new();
    let mut rows = Vec::new();
    for &q in &s.q {
        let f = field(q, s.d)?;
        for &k in &s.k {
            let t = load_table(k, f.clone(), SignConvention::Intro)?;
            let qd = f.size() as f64;
            let max_abs = t.max_abs();
            let conj = conjugation_symmetry_check(&t);
            let expect = if k % 2 == 0 { 1.0 } else { -1.0 };
            let collapse_err = (t.complete_sum() - expect).norm();
            let collapse_tol = (t.tolerance() * qd.powf((k as f64 - 1.0) / 2.0) * qd).max(1e-9);
            // all a at once costs q^{d(k-1)} tuples per value
            let work = (f.order() as f64).powi(k as i32 - 1) * qd;
            let naive = (work <= s.naive_cap as f64).then(|| {
                f.elements()
                    .collect::<Vec<_>>()
                    .par_iter()
                    .map(|&x| {
                        kloosterman_naive(k, x, &f, SignConvention::Intro, u64::MAX)
                            .map(|v| (v - t.get(x)).norm())
                    })
                    .collect::<klab::Result<Vec<f64>>>()
                    .map(|v| v.into_iter().fold(0.0, f64::max))
            });
            let naive = naive.transpose()?;
            let mut failed = Vec::new();
            if max_abs > k as f64 + 1e-9 {
                failed.push(format!("max |Kl| = {max_abs} > {k}"));
            }
            if conj > 1e-9 {
                failed.push(format!("conjugation deviation {conj:e}"));
            }
            if collapse_err > collapse_tol {
                failed.push(format!("complete sum off by {collapse_err:e}"));
            }
            if naive.is_some_and(|dev| dev > 1e-8 * k as f64) {
                failed.push(format!("naive deviation {:e}", naive.unwrap()));
            }
            for msg in &failed {
                violations.push(format!("q={q} d={} k={k}: {msg}", s.d));
            }
            table.push(vec![
                q.to_string(),
                s.d.to_string(),
                k.to_string(),
                num(max_abs),
                num(conj),
                num(collapse_err),
                num(collapse_tol),
                naive.map(num).unwrap_or_default(),
                failed.is_empty().to_string(),
            ]);
            rows.push(json!({
                "q": q, "d": s.d, "k": k, "max_abs": max_abs, "conj_dev": conj,
                "collapse_err": collapse_err, "naive_max_dev": naive, "pass": failed.is_empty(),
            }));
        }
    }
    let summary = json!({ "all_pass": violations.is_empty(), "checks": rows });
    Ok((echo(&s)?, Outcome { summary, table, violations }))
}
