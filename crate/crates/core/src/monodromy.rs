//! The multiset `S_k` of non-zero `(1 + z2 - z3 - z4)^k` over `k`-th roots of
//! unity `z_i`, computed exactly in a finite field containing `mu_k`, and the
//! multiplicative stabilizer of that multiset.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_field::{build_extension, is_prime, make_prime_field, ExtElement, ExtField};

/// Above this field size the stabilizer search only tries ratios of entries.
pub const BRUTE_FORCE_STABILIZER_LIMIT: usize = 1_000_000;

/// Minimal `d` with `k | q^d - 1`.
pub fn find_embedding_degree(k: u64, q: u64) -> Result<usize> {
    if k == 0 {
        return Err(Error::BadK);
    }
    if k % q == 0 {
        return Err(Error::CharDividesK { k: k as usize, q });
    }
    let mut x = 1 % k;
    for d in 1..=k as usize {
        x = ((x as u128 * q as u128) % k as u128) as u64;
        if x == 1 % k {
            return Ok(d);
        }
    }
    unreachable!("q is a unit mod k")
}

/// The `k` distinct `k`-th roots of unity, powers of `g^{(q^d-1)/k}`.
pub fn kth_roots(k: usize, field: &ExtField) -> Result<Vec<ExtElement>> {
    if k == 0 {
        return Err(Error::BadK);
    }
    if field.order() % k != 0 {
        return Err(Error::NoKthRoots {
            k,
            q: field.q(),
            d: field.degree(),
        });
    }
    let zeta = field.pow(field.mult_generator(), (field.order() / k) as u64);
    Ok((0..k as u64).map(|j| field.pow(zeta, j)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkMultiset {
    pub k: usize,
    pub q: u64,
    pub d: usize,
    pub entries: BTreeMap<ExtElement, usize>,
    /// Number of triples with `1 + z2 - z3 - z4 = 0`.
    pub zero_count: usize,
}

impl SkMultiset {
    pub fn total(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn entries_list(&self) -> Vec<(u32, usize)> {
        self.entries.iter().map(|(e, &m)| (e.0, m)).collect()
    }
}

/// Enumerates all `k^3` triples of `k`-th roots of unity.
pub fn compute_sk(k: usize, host: &ExtField) -> Result<SkMultiset> {
    let roots = kth_roots(k, host)?;
    compute_sk_with_roots(k, host, &roots)
}

/// As [`compute_sk`] with an explicit list of roots of unity.
pub fn compute_sk_with_roots(k: usize, host: &ExtField, roots: &[ExtElement]) -> Result<SkMultiset> {
    let partial: Vec<(BTreeMap<ExtElement, usize>, usize)> = roots
        .par_iter()
        .map(|&z2| {
            let mut map = BTreeMap::new();
            let mut zeros = 0;
            let head = host.add(ExtElement::ONE, z2);
            for &z3 in roots {
                let h3 = host.sub(head, z3);
                for &z4 in roots {
                    let v = host.sub(h3, z4);
                    if v.is_zero() {
                        zeros += 1;
                    } else {
                        *map.entry(host.pow(v, k as u64)).or_insert(0) += 1;
                    }
                }
            }
            (map, zeros)
        })
        .collect();
    let mut entries = BTreeMap::new();
    let mut zero_count = 0;
    for (map, z) in partial {
        zero_count += z;
        for (e, m) in map {
            *entries.entry(e).or_insert(0) += m;
        }
    }
    Ok(SkMultiset {
        k,
        q: host.q(),
        d: host.degree(),
        entries,
        zero_count,
    })
}

/// Smallest-encoding entry of multiplicity one.
pub fn multiplicity_one_element(sk: &SkMultiset) -> Option<ExtElement> {
    sk.entries.iter().find(|(_, &m)| m == 1).map(|(&e, _)| e)
}

fn stabilizes(host: &ExtField, sk: &SkMultiset, mu: ExtElement) -> bool {
    sk.entries
        .iter()
        .all(|(&s, &m)| sk.entries.get(&host.mul(mu, s)) == Some(&m))
}

/// All `mu` in the multiplicative group with `mu S_k = S_k` as multisets, sorted.
///
/// Exhaustive up to [`BRUTE_FORCE_STABILIZER_LIMIT`]; beyond it the
/// candidates are `s / s0` for a fixed entry `s0`, which is forced by `mu s0 in S_k`.
pub fn stabilizer_group(sk: &SkMultiset, host: &ExtField) -> Vec<ExtElement> {
    if host.size() <= BRUTE_FORCE_STABILIZER_LIMIT {
        let all: Vec<ExtElement> = host.nonzero().collect();
        all.into_par_iter().filter(|&mu| stabilizes(host, sk, mu)).collect()
    } else {
        stabilizer_from_ratios(sk, host)
    }
}

/// Candidate search over ratios of entries.
pub fn stabilizer_from_ratios(sk: &SkMultiset, host: &ExtField) -> Vec<ExtElement> {
    let Some((&s0, _)) = sk.entries.iter().next() else {
        return host.nonzero().collect();
    };
    let s0_inv = host.inv(s0).expect("entries are non-zero");
    let mut out: Vec<ExtElement> = sk
        .entries
        .keys()
        .map(|&s| host.mul(s, s0_inv))
        .filter(|&mu| stabilizes(host, sk, mu))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Outcome of the geometric checks for one `(k, q)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkGeometryReport {
    pub k: usize,
    pub q: u64,
    pub d: usize,
    pub distinct_entries: usize,
    pub total: usize,
    pub zero_count: usize,
    pub multiplicity_one: Option<u32>,
    pub stabilizer: Vec<u32>,
    /// `{1}` for even `k`, `{1, -1}` for odd `k`.
    pub stabilizer_expected: bool,
}

impl SkGeometryReport {
    pub fn holds(&self) -> bool {
        self.multiplicity_one.is_some() && self.stabilizer_expected
    }
}

/// Builds the minimal host field for `(k, q)` and runs both checks.
pub fn sk_geometry(k: usize, q: u64) -> Result<SkGeometryReport> {
    let d = find_embedding_degree(k as u64, q)?;
    let host = build_extension(&make_prime_field(q)?, d)?;
    sk_geometry_in(k, &host)
}

pub fn sk_geometry_in(k: usize, host: &ExtField) -> Result<SkGeometryReport> {
    let sk = compute_sk(k, host)?;
    let stab = stabilizer_group(&sk, host);
    let mut expected = vec![ExtElement::ONE];
    if k % 2 == 1 {
        expected.push(host.neg(ExtElement::ONE));
    }
    expected.sort();
    Ok(SkGeometryReport {
        k,
        q: host.q(),
        d: host.degree(),
        distinct_entries: sk.entries.len(),
        total: sk.total(),
        zero_count: sk.zero_count,
        multiplicity_one: multiplicity_one_element(&sk).map(|e| e.0),
        stabilizer_expected: stab == expected,
        stabilizer: stab.into_iter().map(|e| e.0).collect(),
    })
}

/// Smallest prime `q > k` (with `q^d <= max_field` at the minimal `d`) at
/// which both checks hold, if any.
pub fn smallest_good_prime(k: usize, max_field: usize) -> Result<Option<SkGeometryReport>> {
    for q in (k as u64 + 1)..=max_field as u64 {
        if !is_prime(q) || q < 3 {
            continue;
        }
        let d = find_embedding_degree(k as u64, q)?;
        if (q as f64).powi(d as i32) > max_field as f64 {
            continue;
        }
        let report = sk_geometry(k, q)?;
        if report.holds() {
            return Ok(Some(report));
        }
    }
    Ok(None)
}
