//! Hecke eigenvalues of the weight-12 level-1 cusp form and the distribution of
//! `lambda_f * 1` in arithmetic progressions, together with the finite pieces
//! and exponent bookkeeping of the bilinear-form argument for that problem.

mod exponents;
mod fcteqn;

pub use exponents::*;
pub use fcteqn::*;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported table size.
pub const TAU_MAX: usize = 1_000_000;

fn as_decimal<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// `tau(1..=n_max)` exactly and `lambda_f(n) = tau(n) / n^{11/2}`.
#[derive(Debug, Clone)]
pub struct CuspFormCoeffs {
    n_max: usize,
    tau: Vec<BigInt>,
    tau_i128: Vec<i128>,
    lambda: Vec<f64>,
}

impl CuspFormCoeffs {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Index 0 holds 0.
    pub fn tau_values(&self) -> &[BigInt] {
        &self.tau
    }

    pub fn tau(&self, n: usize) -> Result<&BigInt> {
        self.check(n)?;
        Ok(&self.tau[n])
    }

    pub fn lambda(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.lambda[n])
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max {
            Err(Error::OutOfRange {
                n,
                n_max: self.n_max,
            })
        } else {
            Ok(())
        }
    }
}

/// `Delta = x * theta(x)^8` with `theta = sum_{n>=0} (-1)^n (2n+1) x^{n(n+1)/2}`,
/// expanded by seven sparse multiplications in `i128`.
///
/// `|tau(n)| <= d(n) n^{11/2} < 10^36` for `n <= 10^6`, and every partial power of
/// `theta` is smaller still, so nothing overflows.
pub fn tau_table(n_max: usize) -> Result<CuspFormCoeffs> {
    if n_max > TAU_MAX {
        return Err(Error::ResourceLimit(format!("n_max = {n_max} exceeds {TAU_MAX}")));
    }
    let len = n_max;
    let mut sparse = Vec::new();
    for j in 0u64.. {
        let t = (j * (j + 1) / 2) as usize;
        if t >= len {
            break;
        }
        let c = (2 * j + 1) as i128;
        sparse.push((t, if j % 2 == 0 { c } else { -c }));
    }
    let mut power = vec![0i128; len];
    for &(t, c) in &sparse {
        power[t] = c;
    }
    for _ in 1..8 {
        power = (0..len)
            .into_par_iter()
            .map(|i| {
                sparse
                    .iter()
                    .take_while(|&&(t, _)| t <= i)
                    .map(|&(t, c)| c * power[i - t])
                    .sum()
            })
            .collect();
    }
    let mut tau_i128 = vec![0i128; n_max + 1];
    tau_i128[1..].copy_from_slice(&power[..n_max]);
    let tau = tau_i128.iter().map(|&t| BigInt::from(t)).collect();
    let lambda = tau_i128
        .iter()
        .enumerate()
        .map(|(n, &t)| if n == 0 { 0.0 } else { t as f64 / (n as f64).powf(5.5) })
        .collect();
    Ok(CuspFormCoeffs {
        n_max,
        tau,
        tau_i128,
        lambda,
    })
}

/// Smallest prime factor of every `n <= n_max` (0 and 1 map to themselves).
pub fn smallest_prime_factors(n_max: usize) -> Vec<usize> {
    let mut spf: Vec<usize> = (0..=n_max).collect();
    let mut p = 2;
    while p * p <= n_max {
        if spf[p] == p {
            for m in (p * p..=n_max).step_by(p) {
                if spf[m] == m {
                    spf[m] = p;
                }
            }
        }
        p += 1;
    }
    spf
}

/// The `n` at which a Hecke relation fails: `tau(p^e m) = tau(p^e) tau(m)` for
/// `p` not dividing `m`, and `tau(p^{j+1}) = tau(p) tau(p^j) - p^11 tau(p^{j-1})`.
pub fn hecke_violations(coeffs: &CuspFormCoeffs) -> Vec<usize> {
    let spf = smallest_prime_factors(coeffs.n_max);
    let tau = &coeffs.tau;
    let mut bad: Vec<usize> = (2..=coeffs.n_max)
        .into_par_iter()
        .filter(|&n| {
            let p = spf[n];
            let mut pe = 1;
            let mut m = n;
            while m % p == 0 {
                m /= p;
                pe *= p;
            }
            if m > 1 {
                tau[n] != &tau[pe] * &tau[m]
            } else if pe > p {
                let p11 = BigInt::from(p).pow(11);
                tau[n] != &tau[p] * &tau[pe / p] - p11 * &tau[pe / p / p]
            } else {
                false
            }
        })
        .collect();
    bad.sort_unstable();
    if coeffs.n_max >= 1 && coeffs.tau[1] != BigInt::from(1) {
        bad.insert(0, 1);
    }
    bad
}

/// Number of divisors of every `n <= n_max`.
pub fn divisor_counts(n_max: usize) -> Vec<u32> {
    let mut d = vec![0u32; n_max + 1];
    for i in 1..=n_max {
        for m in (i..=n_max).step_by(i) {
            d[m] += 1;
        }
    }
    d
}

/// The `n` with `|lambda_f(n)| > d(n)`.
pub fn deligne_violations(coeffs: &CuspFormCoeffs) -> Vec<usize> {
    let d = divisor_counts(coeffs.n_max);
    (1..=coeffs.n_max)
        .filter(|&n| coeffs.lambda[n].abs() > d[n] as f64 * (1.0 + 1e-12))
        .collect()
}

/// `sigma_11(n) mod 691` for every `n <= n_max`.
pub fn sigma11_mod691(n_max: usize) -> Vec<u64> {
    let mut s = vec![0u64; n_max + 1];
    for dd in 1..=n_max {
        let r = dd as u64 % 691;
        let mut p = 1u64;
        for _ in 0..11 {
            p = p * r % 691;
        }
        for m in (dd..=n_max).step_by(dd) {
            s[m] = (s[m] + p) % 691;
        }
    }
    s
}

/// The `n` with `tau(n) != sigma_11(n) mod 691`.
pub fn congruence_violations(coeffs: &CuspFormCoeffs) -> Vec<usize> {
    let s = sigma11_mod691(coeffs.n_max);
    let m = BigInt::from(691);
    (1..=coeffs.n_max)
        .filter(|&n| coeffs.tau[n].mod_floor(&m).to_u64() != Some(s[n]))
        .collect()
}

/// `(lambda_f * 1)(n) = sum_{d | n} lambda_f(d)`.
pub fn lambda_star_one(coeffs: &CuspFormCoeffs, n: usize) -> Result<f64> {
    coeffs.check(n)?;
    let mut acc = crate::numeric::CompensatedSum::new();
    for d in divisors(n) {
        acc.add(coeffs.lambda[d]);
    }
    Ok(acc.value())
}

/// `(tau * 1)(n) = sum_{d | n} tau(d)`, exact.
pub fn tau_star_one(coeffs: &CuspFormCoeffs, n: usize) -> Result<BigInt> {
    coeffs.check(n)?;
    Ok(divisors(n).into_iter().map(|d| BigInt::from(coeffs.tau_i128[d])).sum())
}

fn divisors(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Euler's totient.
pub fn euler_phi(q: u64) -> u64 {
    (1..=q).filter(|&a| a.gcd(&q) == 1).count() as u64
}

/// One residue class of the progression experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ProgressionReport {
    pub x: usize,
    pub q: u64,
    pub a: u64,
    /// `sum_{n <= x, n = a mod q} (lambda_f * 1)(n)`.
    pub raw: f64,
    /// `(1/phi(q)) sum_{n <= x, (n, q) = 1} (lambda_f * 1)(n)`.
    pub main: f64,
    pub e: f64,
    /// `E q / x`.
    pub normalized: f64,
    /// `sum_{n <= x, n = a} (tau * 1)(n)`.
    #[serde(serialize_with = "as_decimal")]
    pub raw_tau: BigInt,
    /// `phi(q) E` for `tau * 1`, an integer.
    #[serde(serialize_with = "as_decimal")]
    pub e_tau_scaled: BigInt,
}

/// All residue classes coprime to `q`, plus the exact sum of the scaled
/// `tau`-weighted discrepancies.
#[derive(Debug, Clone, Serialize)]
pub struct ProgressionScan {
    pub x: usize,
    pub q: u64,
    pub reports: Vec<ProgressionReport>,
    #[serde(serialize_with = "as_decimal")]
    pub exact_sum: BigInt,
    pub max_normalized: f64,
}

struct Prefix {
    lstar: Vec<f64>,
    tstar: Vec<BigInt>,
}

fn star_arrays(coeffs: &CuspFormCoeffs, x: usize) -> Prefix {
    let mut lstar = vec![0.0f64; x + 1];
    let mut tstar = vec![0i128; x + 1];
    for d in 1..=x {
        let (l, t) = (coeffs.lambda[d], coeffs.tau_i128[d]);
        for m in (d..=x).step_by(d) {
            lstar[m] += l;
            tstar[m] += t;
        }
    }
    Prefix {
        lstar,
        tstar: tstar.into_iter().map(BigInt::from).collect(),
    }
}

fn check_progression(coeffs: &CuspFormCoeffs, x: usize, q: u64) -> Result<()> {
    if x > coeffs.n_max {
        return Err(Error::OutOfRange {
            n: x,
            n_max: coeffs.n_max,
        });
    }
    if q < 2 {
        return Err(Error::TooSmall(q));
    }
    Ok(())
}

fn report_for(p: &Prefix, x: usize, q: u64, a: u64, phi: u64, total: f64, total_tau: &BigInt) -> ProgressionReport {
    let mut raw = crate::numeric::CompensatedSum::new();
    let mut raw_tau = BigInt::zero();
    let start = if a % q == 0 { q } else { a % q } as usize;
    for n in (start..=x).step_by(q as usize) {
        raw.add(p.lstar[n]);
        raw_tau += &p.tstar[n];
    }
    let raw = raw.value();
    let main = total / phi as f64;
    let e = raw - main;
    ProgressionReport {
        x,
        q,
        a,
        raw,
        main,
        e,
        normalized: e * q as f64 / x as f64,
        e_tau_scaled: BigInt::from(phi) * &raw_tau - total_tau,
        raw_tau,
    }
}

fn coprime_totals(p: &Prefix, x: usize, q: u64) -> (f64, BigInt) {
    let mut total = crate::numeric::CompensatedSum::new();
    let mut total_tau = BigInt::zero();
    for n in 1..=x {
        if (n as u64).gcd(&q) == 1 {
            total.add(p.lstar[n]);
            total_tau += &p.tstar[n];
        }
    }
    (total.value(), total_tau)
}

/// `E(x; q, a)` for a single residue class coprime to `q`.
pub fn discrepancy(coeffs: &CuspFormCoeffs, x: usize, q: u64, a: u64) -> Result<ProgressionReport> {
    check_progression(coeffs, x, q)?;
    if a.gcd(&q) != 1 {
        return Err(Error::BadResidue { a, q });
    }
    let p = star_arrays(coeffs, x);
    let (total, total_tau) = coprime_totals(&p, x, q);
    Ok(report_for(&p, x, q, a % q, euler_phi(q), total, &total_tau))
}

/// `E(x; q, a)` for every `a` coprime to `q`.
pub fn progression_scan(coeffs: &CuspFormCoeffs, x: usize, q: u64) -> Result<ProgressionScan> {
    check_progression(coeffs, x, q)?;
    let p = star_arrays(coeffs, x);
    let (total, total_tau) = coprime_totals(&p, x, q);
    let phi = euler_phi(q);
    let reports: Vec<ProgressionReport> = (1..q)
        .filter(|a| a.gcd(&q) == 1)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&a| report_for(&p, x, q, a, phi, total, &total_tau))
        .collect();
    let exact_sum = reports.iter().map(|r| &r.e_tau_scaled).sum();
    let max_normalized = reports.iter().map(|r| r.normalized.abs()).fold(0.0, f64::max);
    Ok(ProgressionScan {
        x,
        q,
        reports,
        exact_sum,
        max_normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `x prod (1 - x^n)^24` by dense multiplication.
    fn delta_oracle(len: usize) -> Vec<BigInt> {
        let mut f = vec![BigInt::zero(); len];
        f[0] = BigInt::from(1);
        for n in 1..len {
            for _ in 0..24 {
                for i in (n..len).rev() {
                    let sub = f[i - n].clone();
                    f[i] -= sub;
                }
            }
        }
        let mut out = vec![BigInt::zero(); len + 1];
        out[1..].clone_from_slice(&f);
        out
    }

    #[test]
    fn small_tau_values() {
        let c = tau_table(200).unwrap();
        assert_eq!(c.tau(1).unwrap(), &BigInt::from(1));
        assert_eq!(c.tau(2).unwrap(), &BigInt::from(-24));
        assert_eq!(c.tau(3).unwrap(), &BigInt::from(252));
        assert_eq!(c.tau(6).unwrap(), &BigInt::from(-6048));
        let oracle = delta_oracle(200);
        assert_eq!(&c.tau_values()[1..], &oracle[1..]);
        assert!(matches!(tau_table(TAU_MAX + 1), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn classical_relations() {
        let c = tau_table(20_000).unwrap();
        assert!(hecke_violations(&c).is_empty());
        assert!(deligne_violations(&c).is_empty());
        assert!(congruence_violations(&c).is_empty());
    }

    #[test]
    fn lambda_star_examples() {
        let c = tau_table(100).unwrap();
        assert_eq!(lambda_star_one(&c, 1).unwrap(), 1.0);
        let l = |n| c.lambda(n).unwrap();
        assert!((lambda_star_one(&c, 7).unwrap() - (1.0 + l(7))).abs() < 1e-15);
        assert!((lambda_star_one(&c, 4).unwrap() - (1.0 + l(2) + l(4))).abs() < 1e-15);
        assert!(matches!(lambda_star_one(&c, 101), Err(Error::OutOfRange { .. })));
        assert_eq!(tau_star_one(&c, 2).unwrap(), BigInt::from(-23));
    }

    #[test]
    fn progression_centering() {
        let c = tau_table(3000).unwrap();
        let scan = progression_scan(&c, 3000, 53).unwrap();
        assert_eq!(scan.reports.len(), 52);
        assert!(scan.exact_sum.is_zero());
        let one = discrepancy(&c, 3000, 53, 5).unwrap();
        assert_eq!(one.e_tau_scaled, scan.reports[4].e_tau_scaled);
        assert!(matches!(discrepancy(&c, 3000, 53, 106), Err(Error::BadResidue { .. })));
        // empty progression: x < q, a > x
        let small = discrepancy(&c, 40, 53, 47).unwrap();
        assert_eq!(small.raw, 0.0);
        assert!((small.e + small.main).abs() < 1e-15);
    }
}
