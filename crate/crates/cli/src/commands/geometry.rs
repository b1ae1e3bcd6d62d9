use anyhow::{anyhow, Result};
use serde::Serialize;
use serde_json::{json, Value};

use klab::monodromy::{compute_sk, find_embedding_degree, multiplicity_one_element, smallest_good_prime, stabilizer_group};
use klab::ExtElement;

use super::{echo, field};
use crate::args::SkArgs;
use crate::output::Outcome;
use crate::output::Table;

/// Field-size limit when searching for a prime.
const SEARCH_LIMIT: usize = 1_000_000;

#[derive(Serialize)]
struct SkSettings {
    k: Vec<usize>,
    q: Option<u64>,
    d: Option<usize>,
}

pub fn sk(a: &SkArgs) -> Result<(Value, Outcome)> {
    let s = SkSettings {
        k: a.k.clone().unwrap_or_else(|| vec![2]),
        q: a.q,
        d: a.d,
    };
    let mut table = Table::new(&["k", "q", "d", "element", "multiplicity"]);
    let mut results = Vec::new();
    for &k in &s.k {
        let q = match s.q {
            Some(q) => q,
            None => smallest_good_prime(k, SEARCH_LIMIT)?
                .ok_or_else(|| anyhow!("no prime with q^d <= {SEARCH_LIMIT} satisfies both checks for k = {k}"))?
                .q,
        };
        let d = match s.d {
            Some(d) => d,
            None => find_embedding_degree(k as u64, q)?,
        };
        let host = field(q, d)?;
        let sk = compute_sk(k, &host)?;
        let stab = stabilizer_group(&sk, &host);
        let mut expected = vec![ExtElement::ONE];
        if k % 2 == 1 {
            expected.push(host.neg(ExtElement::ONE));
        }
        expected.sort();
        let witness = multiplicity_one_element(&sk);
        for (e, m) in sk.entries_list() {
            table.push(vec![k.to_string(), q.to_string(), d.to_string(), e.to_string(), m.to_string()]);
        }
        results.push(json!({
            "k": k,
            "q": q,
            "d": d,
            "entries": sk.entries_list(),
            "total": sk.total(),
            "zero_count": sk.zero_count,
            "multiplicity_one": witness.map(|e| e.0),
            "stabilizer": stab.iter().map(|e| e.0).collect::<Vec<_>>(),
            "stabilizer_expected": stab == expected,
        }));
    }
    Ok((echo(&s)?, Outcome { summary: json!({ "multisets": results }), table, violations: vec![] }))
}
