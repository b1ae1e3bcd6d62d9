//! Finite Fourier-side pieces attached to a function `K` on `Z/qZ`, and the
//! bound calculators for the sums they feed into.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kloosterman::KloostermanTable;
use crate::numeric::csum;

fn check_table(k: &[Complex64], table: &KloostermanTable, rank: usize) -> Result<u64> {
    if table.k() != rank {
        return Err(Error::BadK);
    }
    if table.field().degree() != 1 {
        return Err(Error::NeedPrimeField);
    }
    let q = table.field().q();
    if k.len() as u64 != q {
        return Err(Error::ConstraintViolated(vec![format!(
            "K has length {} but q = {q}",
            k.len()
        )]));
    }
    Ok(q)
}

/// `K = 1` at `a mod q`, zero elsewhere.
pub fn delta_function(q: u64, a: u64) -> Vec<Complex64> {
    let mut k = vec![Complex64::new(0.0, 0.0); q as usize];
    k[(a % q) as usize] = Complex64::new(1.0, 0.0);
    k
}

/// `K^(u) = q^{-1/2} sum_x K(x) e(ux/q)`.
pub fn khat(k: &[Complex64], u: u64) -> Complex64 {
    let q = k.len() as u64;
    let step = std::f64::consts::TAU / q as f64;
    let s = csum(
        k.iter()
            .enumerate()
            .map(|(x, &v)| v * Complex64::from_polar(1.0, step * ((u % q) * x as u64 % q) as f64)),
    );
    s / (q as f64).sqrt()
}

/// `K~(m) = q^{-1/2} sum_{u != 0} K(u) Kl_3(m u)`, with `kl3` a rank-3 table over `F_q`.
pub fn ktilde(k: &[Complex64], m: u64, kl3: &KloostermanTable) -> Result<Complex64> {
    let q = check_table(k, kl3, 3)?;
    let f = kl3.field();
    let mq = m % q;
    let s = csum((1..q).map(|u| k[u as usize] * kl3.get(f.embed(mq * u % q))));
    Ok(s / (q as f64).sqrt())
}

/// `K~(m)` through the Fourier side, for `m != 0 mod q`:
/// `q^{-1/2} sum_{v != 0} K^(v) Kl_2(m / v) - q^{-3/2} K(0)`.
pub fn ktilde_via_khat(k: &[Complex64], m: u64, kl2: &KloostermanTable) -> Result<Complex64> {
    let q = check_table(k, kl2, 2)?;
    if m % q == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let f = kl2.field();
    let mq = f.embed(m % q);
    let s = csum((1..q).map(|v| {
        let ev = f.embed(v);
        khat(k, v) * kl2.get(f.div(mq, ev).expect("v != 0"))
    }));
    let qf = q as f64;
    Ok(s / qf.sqrt() - k[0] / qf.powf(1.5))
}

/// The four bracket values, each carrying `Q^{C1}` where it applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedBounds {
    pub pv: f64,
    pub fkm1: f64,
    pub type_ii_pv: f64,
    pub type_i_smooth: f64,
}

/// `MN (1/q + q^{1/2}/N)`.
pub fn pv_smooth_bound(m: f64, n: f64, q: f64) -> f64 {
    m * n * (1.0 / q + q.sqrt() / n)
}

/// `M (q^{-1/8} + q^{3/8} M^{-1/2})`.
pub fn fkm1_bound(m: f64, q: f64) -> f64 {
    m * (q.powf(-0.125) + q.powf(0.375) / m.sqrt())
}

/// `||alpha|| ||beta|| (MN)^{1/2} (M^{-1/2} + q^{1/4} N^{-1/2})`.
pub fn type_ii_pv_bound(m: f64, n: f64, q: f64, alpha_l2: f64, beta_l2: f64) -> f64 {
    alpha_l2 * beta_l2 * (m * n).sqrt() * (m.powf(-0.5) + q.powf(0.25) / n.sqrt())
}

/// `MN q^{1/4} M^{-1/6} N^{-5/12}`.
pub fn type_i_smooth_bound(m: f64, n: f64, q: f64) -> f64 {
    m * n * q.powf(0.25) * m.powf(-1.0 / 6.0) * n.powf(-5.0 / 12.0)
}

/// Failing conditions among `1 <= M <= N^2`, `N < q`, `MN <= q^{3/2}`.
pub fn type_i_smooth_hypotheses(m: f64, n: f64, q: f64) -> Vec<String> {
    let mut bad = Vec::new();
    if m < 1.0 {
        bad.push("1 <= M".to_string());
    }
    if m > n * n {
        bad.push("M <= N^2".to_string());
    }
    if n >= q {
        bad.push("N < q".to_string());
    }
    if m * n > q.powf(1.5) {
        bad.push("MN <= q^(3/2)".to_string());
    }
    bad
}

/// All four bounds. The coefficient norms default to those of unit
/// coefficients on `[1, M]` and an interval of length `N`.
pub fn combined_bounds(
    m: f64,
    n: f64,
    q: f64,
    big_q: f64,
    c1: f64,
    norms: Option<(f64, f64)>,
) -> Result<CombinedBounds> {
    if !(m > 0.0 && n > 0.0 && q > 0.0 && big_q >= 1.0) {
        return Err(Error::HypothesisViolated(vec!["M, N, q > 0 and Q >= 1".to_string()]));
    }
    let bad = type_i_smooth_hypotheses(m, n, q);
    if !bad.is_empty() {
        return Err(Error::HypothesisViolated(bad));
    }
    let qc = big_q.powf(c1);
    let (a2, b2) = norms.unwrap_or((m.sqrt(), n.sqrt()));
    Ok(CombinedBounds {
        pv: qc * pv_smooth_bound(m, n, q),
        fkm1: qc * fkm1_bound(m, q),
        type_ii_pv: type_ii_pv_bound(m, n, q, a2, b2),
        type_i_smooth: qc * type_i_smooth_bound(m, n, q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kloosterman::{prime_table, SignConvention};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ktilde_delta_identity() {
        let q = 53;
        let kl3 = prime_table(3, q, SignConvention::Intro).unwrap();
        let f = kl3.field();
        for a in 1..q {
            let k = delta_function(q, a);
            assert_eq!(k[0], Complex64::new(0.0, 0.0));
            assert!((khat(&k, 0) - 1.0 / (q as f64).sqrt()).norm() < 1e-15);
            for m in 0..q {
                let expect = kl3.get(f.embed(a * m % q)) / (q as f64).sqrt();
                assert!((ktilde(&k, m, &kl3).unwrap() - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ktilde_zero_and_linearity() {
        let q = 31;
        let kl3 = prime_table(3, q, SignConvention::Intro).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); q as usize];
        assert_eq!(ktilde(&zero, 5, &kl3).unwrap(), Complex64::new(0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rand_vec = || -> Vec<Complex64> {
            (0..q).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
        };
        let (k1, k2) = (rand_vec(), rand_vec());
        let c = Complex64::new(0.3, -1.2);
        let mix: Vec<Complex64> = k1.iter().zip(&k2).map(|(a, b)| a + c * b).collect();
        for m in 0..q {
            let lhs = ktilde(&mix, m, &kl3).unwrap();
            let rhs = ktilde(&k1, m, &kl3).unwrap() + c * ktilde(&k2, m, &kl3).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
        assert!(matches!(ktilde(&zero[..5], 1, &kl3), Err(Error::ConstraintViolated(_))));
        assert!(matches!(ktilde(&zero, 1, &prime_table(2, q, SignConvention::Intro).unwrap()), Err(Error::BadK)));
    }

    #[test]
    fn fourier_route_agrees() {
        let q = 29;
        let kl3 = prime_table(3, q, SignConvention::Intro).unwrap();
        let kl2 = prime_table(2, q, SignConvention::Intro).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k: Vec<Complex64> = (0..q)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for m in 1..q {
            let a = ktilde(&k, m, &kl3).unwrap();
            let b = ktilde_via_khat(&k, m, &kl2).unwrap();
            assert!((a - b).norm() < 1e-10, "m = {m}: {a} vs {b}");
        }
    }

    #[test]
    fn bound_substitutions() {
        let q: f64 = 10007.0;
        let r = q.sqrt();
        let b = combined_bounds(r, r, q, 1.0, 1.0, None).unwrap();
        assert!((b.type_i_smooth / (r * r) - q.powf(-1.0 / 24.0)).abs() < 1e-12);
        assert!((pv_smooth_bound(7.0, q, q) - 7.0 * q * (1.0 / q + q.powf(-0.5))).abs() < 1e-6);
        assert!((fkm1_bound(q, q) - 2.0 * q.powf(0.875)).abs() < 1e-6);
        assert!(matches!(
            combined_bounds(10.0, q, q, 1.0, 1.0, None),
            Err(Error::HypothesisViolated(_))
        ));
        let scaled = combined_bounds(r, r, q, 2.0, 1.0, None).unwrap();
        assert!((scaled.pv / b.pv - 2.0).abs() < 1e-12);
        assert_eq!(scaled.type_ii_pv, b.type_ii_pv);
    }
}
