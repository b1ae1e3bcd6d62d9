//! Bilinear forms `B(K, alpha, beta) = sum_m sum_n alpha_m beta_n K(mn)` in
//! Kloosterman sums, the bound brackets they are compared against, and the
//! exact shift-by-`ab` re-indexing.
//!
//! Bound calculators drop every `q^eps` and set implied constants to 1.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_field::make_prime_field;
use crate::numeric::{csum, rsum, ComplexSum};
use crate::sum_product::SumProductContext;

/// Default cap on `M * N` for direct evaluation.
pub const DEFAULT_MN_CAP: u64 = 100_000_000;
pub const POWER_ITERATION_TOL: f64 = 1e-10;
pub const POWER_ITERATION_MAX: usize = 10_000;

/// Coefficients `alpha_m` (`1 <= m <= M`) and `beta_n` on
/// `offset <= n < offset + N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BilinearInstance {
    pub m: usize,
    pub n: usize,
    pub offset: u64,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
}

impl BilinearInstance {
    /// Validates lengths and that the `n`-interval lies in `[1, q-1]`.
    pub fn new(q: u64, offset: u64, alpha: Vec<Complex64>, beta: Vec<Complex64>) -> Result<Self> {
        let n = beta.len();
        if offset < 1 || offset + n as u64 > q {
            return Err(Error::ConstraintViolated(vec![format!(
                "interval [{offset}, {}) not inside [1, {q})",
                offset + n as u64
            )]));
        }
        Ok(BilinearInstance {
            m: alpha.len(),
            n,
            offset,
            alpha,
            beta,
        })
    }

    /// `beta = 1` on the interval.
    pub fn with_indicator(q: u64, offset: u64, n: usize, alpha: Vec<Complex64>) -> Result<Self> {
        Self::new(q, offset, alpha, vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn norms(&self) -> Norms {
        Norms::of(&self.alpha, &self.beta)
    }
}

/// Norms entering the bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub alpha_l1: f64,
    pub alpha_l2: f64,
    pub beta_l2: f64,
    pub alpha_max: f64,
}

impl Norms {
    pub fn of(alpha: &[Complex64], beta: &[Complex64]) -> Self {
        Norms {
            alpha_l1: rsum(alpha.iter().map(|z| z.norm())),
            alpha_l2: rsum(alpha.iter().map(|z| z.norm_sqr())).sqrt(),
            beta_l2: rsum(beta.iter().map(|z| z.norm_sqr())).sqrt(),
            alpha_max: alpha.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    /// Norms of `alpha = 1` on `[1, M]`, `beta = 1` on an interval of length `N`.
    pub fn unit(m: f64, n: f64) -> Self {
        Norms {
            alpha_l1: m,
            alpha_l2: m.sqrt(),
            beta_l2: n.sqrt(),
            alpha_max: 1.0,
        }
    }
}

/// Named coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ensemble {
    /// Uniform on the unit circle.
    Steinhaus,
    /// Uniform on `{+1, -1}`.
    Rademacher,
    AllOnes,
}

impl Ensemble {
    pub const ALL: [Ensemble; 3] = [Ensemble::Steinhaus, Ensemble::Rademacher, Ensemble::AllOnes];

    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Steinhaus => "steinhaus",
            Ensemble::Rademacher => "rademacher",
            Ensemble::AllOnes => "all_ones",
        }
    }

    pub fn sample<R: Rng>(self, len: usize, rng: &mut R) -> Vec<Complex64> {
        match self {
            Ensemble::Steinhaus => (0..len)
                .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect(),
            Ensemble::Rademacher => (0..len)
                .map(|_| Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0))
                .collect(),
            Ensemble::AllOnes => vec![Complex64::new(1.0, 0.0); len],
        }
    }
}

impl std::str::FromStr for Ensemble {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ensemble::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown ensemble {s:?}"))
    }
}

fn require_prime(ctx: &SumProductContext) -> Result<u64> {
    if ctx.field().degree() != 1 {
        return Err(Error::NeedPrimeField);
    }
    Ok(ctx.field().q())
}

#[inline]
fn kernel(ctx: &SumProductContext, q: u64, m: u64, n: u64) -> Complex64 {
    ctx.kc(ctx.field().embed((m % q) * (n % q) % q))
}

/// `sum_m sum_n alpha_m beta_n K_c(mn)`, summed row by row.
pub fn bilinear_form(ctx: &SumProductContext, inst: &BilinearInstance) -> Result<Complex64> {
    let q = require_prime(ctx)?;
    if (inst.m as u64).saturating_mul(inst.n as u64) > DEFAULT_MN_CAP {
        return Err(Error::RangeTooLarge(format!("MN = {}", inst.m * inst.n)));
    }
    let mut acc = ComplexSum::new();
    for (i, a) in inst.alpha.iter().enumerate() {
        let m = i as u64 + 1;
        let row = csum(
            inst.beta
                .iter()
                .enumerate()
                .map(|(j, b)| b * kernel(ctx, q, m, inst.offset + j as u64)),
        );
        acc.add(a * row);
    }
    Ok(acc.value())
}

/// `||alpha||_2 ||beta||_2 (MN)^{1/2}`.
pub fn trivial_bound(inst: &BilinearInstance) -> f64 {
    let nr = inst.norms();
    nr.alpha_l2 * nr.beta_l2 * ((inst.m * inst.n) as f64).sqrt()
}

/// A bound written as `prefactor * (term_1 + term_2 + ...)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub terms: Vec<f64>,
}

impl Bracket {
    pub fn value(&self) -> f64 {
        self.terms.iter().sum()
    }

    /// `-log_q` of the dominant term, the power of `q` saved over the
    /// trivial bound.
    pub fn saving_exponent(&self, q: f64) -> f64 {
        let dominant = self.terms.iter().copied().fold(0.0, f64::max);
        -dominant.ln() / q.ln()
    }
}

/// `q^{-1/4} + M^{-1/2} + N^{-1/2} q^{1/4} log q`.
pub fn pv_bracket(m: f64, n: f64, q: f64) -> Bracket {
    Bracket {
        terms: vec![q.powf(-0.25), m.powf(-0.5), n.powf(-0.5) * q.powf(0.25) * q.ln()],
    }
}

/// Trivial bound times [`pv_bracket`].
pub fn pv_bound(inst: &BilinearInstance, q: u64) -> f64 {
    trivial_bound(inst) * pv_bracket(inst.m as f64, inst.n as f64, q as f64).value()
}

/// The failing conditions among `1 <= M <= N q^{1/4}` and `q^{1/4} < MN < q^{5/4}`.
pub fn type_ii_hypotheses(m: f64, n: f64, q: f64) -> Vec<String> {
    let mut bad = Vec::new();
    if m < 1.0 {
        bad.push("1 <= M".to_string());
    }
    if m > n * q.powf(0.25) {
        bad.push("M <= N q^(1/4)".to_string());
    }
    if m * n <= q.powf(0.25) {
        bad.push("q^(1/4) < MN".to_string());
    }
    if m * n >= q.powf(1.25) {
        bad.push("MN < q^(5/4)".to_string());
    }
    bad
}

/// The failing conditions among `1 <= M <= N^2`, `N < q`, `MN < q^{3/2}`.
pub fn type_i_hypotheses(m: f64, n: f64, q: f64) -> Vec<String> {
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
    if m * n >= q.powf(1.5) {
        bad.push("MN < q^(3/2)".to_string());
    }
    bad
}

/// `M^{-1/2} + (MN)^{-3/16} q^{11/64}`.
pub fn type_ii_bracket(m: f64, n: f64, q: f64) -> Bracket {
    Bracket {
        terms: vec![m.powf(-0.5), (m * n).powf(-3.0 / 16.0) * q.powf(11.0 / 64.0)],
    }
}

/// `(M^2 N^5 / q^3)^{-1/12}`: the general type I bound divided by the trivial
/// bound `MN` of unit coefficients against an interval.
pub fn type_i_bracket(m: f64, n: f64, q: f64) -> Bracket {
    Bracket {
        terms: vec![(m * m * n.powi(5) / q.powi(3)).powf(-1.0 / 12.0)],
    }
}

/// General bilinear bound: trivial bound times [`type_ii_bracket`].
pub fn thm_type_ii_bound(inst: &BilinearInstance, q: u64) -> Result<f64> {
    let (m, n, qf) = (inst.m as f64, inst.n as f64, q as f64);
    let bad = type_ii_hypotheses(m, n, qf);
    if !bad.is_empty() {
        return Err(Error::HypothesisViolated(bad));
    }
    Ok(trivial_bound(inst) * type_ii_bracket(m, n, qf).value())
}

/// `||alpha||_1^{1/2} ||alpha||_2^{1/2} M^{1/4} N (M^2 N^5 / q^3)^{-1/12}`.
pub fn thm_type_i_bound(m: usize, n: usize, q: u64, norms: &Norms) -> Result<f64> {
    let (mf, nf, qf) = (m as f64, n as f64, q as f64);
    let bad = type_i_hypotheses(mf, nf, qf);
    if !bad.is_empty() {
        return Err(Error::HypothesisViolated(bad));
    }
    Ok((norms.alpha_l1 * norms.alpha_l2).sqrt() * mf.powf(0.25) * nf * type_i_bracket(mf, nf, qf).value())
}

/// Saving exponent of the general bracket at `M = N = q^theta`.
pub fn type_ii_saving_at(theta: f64, q: f64) -> f64 {
    let x = q.powf(theta);
    type_ii_bracket(x, x, q).saving_exponent(q)
}

/// Saving exponent of the type I bracket at `M = N = q^theta`.
pub fn type_i_saving_at(theta: f64, q: f64) -> f64 {
    let x = q.powf(theta);
    type_i_bracket(x, x, q).saving_exponent(q)
}

/// Smallest `theta` in `[lo, hi]` with `saving(theta) >= 0`, by bisection.
/// Assumes the saving is increasing across the crossing.
pub fn crossing_exponent(saving: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    if saving(lo) >= 0.0 || saving(hi) < 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if saving(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Largest singular value of the `M x N` matrix `[K_c(m n)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorm {
    pub sigma_max: f64,
    pub iterations: usize,
    pub gap: f64,
}

/// Rows `m = 1..=M`, columns `n = offset..offset+N`.
pub fn kernel_matrix(ctx: &SumProductContext, m: usize, n: usize, offset: u64) -> Result<Vec<Vec<Complex64>>> {
    let q = require_prime(ctx)?;
    if (m as u64).saturating_mul(n as u64) > DEFAULT_MN_CAP {
        return Err(Error::RangeTooLarge(format!("MN = {}", m * n)));
    }
    Ok((1..=m as u64)
        .map(|mm| (0..n as u64).map(|j| kernel(ctx, q, mm, offset + j)).collect())
        .collect())
}

/// Power iteration on the `N x N` Gram matrix from the all-ones vector.
///
/// Stops once the relative change of the Rayleigh quotient drops below
/// [`POWER_ITERATION_TOL`].
pub fn operator_norm(ctx: &SumProductContext, m: usize, n: usize, offset: u64) -> Result<OperatorNorm> {
    let a = kernel_matrix(ctx, m, n, offset)?;
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, gi) in gram.iter_mut().enumerate() {
        for (j, g) in gi.iter_mut().enumerate() {
            *g = csum(a.iter().map(|row| row[i].conj() * row[j]));
        }
    }
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        gram.iter()
            .map(|row| csum(row.iter().zip(v).map(|(g, x)| g * x)))
            .collect()
    };
    let norm = |v: &[Complex64]| rsum(v.iter().map(|z| z.norm_sqr())).sqrt();

    let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut estimate = 0.0;
    let mut gap = f64::INFINITY;
    for it in 1..=POWER_ITERATION_MAX {
        let w = apply(&v);
        let rayleigh = csum(v.iter().zip(&w).map(|(x, y)| x.conj() * y)).re;
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(OperatorNorm {
                sigma_max: 0.0,
                iterations: it,
                gap: 0.0,
            });
        }
        gap = (rayleigh - estimate).abs() / rayleigh.abs().max(f64::MIN_POSITIVE);
        estimate = rayleigh;
        if gap < POWER_ITERATION_TOL {
            return Ok(OperatorNorm {
                sigma_max: estimate.max(0.0).sqrt(),
                iterations: it,
                gap,
            });
        }
        v = w.into_iter().map(|z| z / wn).collect();
    }
    Err(Error::NoConvergence {
        iterations: POWER_ITERATION_MAX,
        gap,
        estimate: estimate.max(0.0).sqrt(),
    })
}

/// Which of `2B < q`, `AB <= N`, `AM < q` hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFlags {
    pub two_b_lt_q: bool,
    pub ab_le_n: bool,
    pub am_lt_q: bool,
}

impl ConstraintFlags {
    pub fn evaluate(a: u64, b: u64, m: u64, n: u64, q: u64) -> Self {
        ConstraintFlags {
            two_b_lt_q: 2 * b < q,
            ab_le_n: a * b <= n,
            am_lt_q: a * m < q,
        }
    }

    pub fn all(&self) -> bool {
        self.two_b_lt_q && self.ab_le_n && self.am_lt_q
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !self.two_b_lt_q {
            v.push("2B < q".to_string());
        }
        if !self.ab_le_n {
            v.push("AB <= N".to_string());
        }
        if !self.am_lt_q {
            v.push("AM < q".to_string());
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterPlan {
    pub a: u64,
    pub b: u64,
    pub a_real: f64,
    pub b_real: f64,
    pub flags: ConstraintFlags,
}

fn round_param(x: f64) -> u64 {
    x.round().max(1.0) as u64
}

fn make_plan(a_real: f64, b_real: f64, m: u64, n: u64, q: u64) -> ParameterPlan {
    let (a, b) = (round_param(a_real), round_param(b_real));
    ParameterPlan {
        a,
        b,
        a_real,
        b_real,
        flags: ConstraintFlags::evaluate(a, b, m, n, q),
    }
}

/// `A = M^{-1/3} N^{2/3}`, `B = (MN)^{1/3}`.
pub fn plan_parameters_type_i(m: u64, n: u64, q: u64) -> ParameterPlan {
    let (mf, nf) = (m as f64, n as f64);
    make_plan(mf.cbrt().recip() * (nf * nf).cbrt(), (mf * nf).cbrt(), m, n, q)
}

/// `A = q^{1/8} M^{-1/2} N^{1/2}`, `B = q^{-1/8} M^{1/2} N^{1/2}`.
pub fn plan_parameters_type_ii(m: u64, n: u64, q: u64) -> ParameterPlan {
    let (mf, nf, qf) = (m as f64, n as f64, q as f64);
    let a = qf.powf(0.125) * (nf / mf).sqrt();
    let b = qf.powf(-0.125) * (mf * nf).sqrt();
    make_plan(a, b, m, n, q)
}

/// Compares `B(K_c, alpha, 1_N)` with its shift-by-`ab` average
///
/// ```text
/// (1/AB) sum_{A<a<=2A} sum_{B<b<=2B} sum_m alpha_m sum_{n + ab in N} K_c(a m (abar n + b))
/// ```
///
/// and returns `|lhs - rhs| / (|lhs| + 1)`. The inner `n` runs over residues
/// mod `q`; the right side is evaluated in integer arithmetic mod `q`.
pub fn shift_identity_check(
    ctx: &SumProductContext,
    alpha: &[Complex64],
    offset: u64,
    n_len: usize,
    a_param: u64,
    b_param: u64,
) -> Result<f64> {
    let q = require_prime(ctx)?;
    let m_len = alpha.len() as u64;
    let mut bad = ConstraintFlags::evaluate(a_param, b_param, m_len, n_len as u64, q).violations();
    if a_param == 0 || b_param == 0 {
        bad.push("A, B >= 1".to_string());
    }
    if 2 * a_param >= q {
        bad.push("2A < q (a must be invertible)".to_string());
    }
    if offset < 1 || offset + n_len as u64 > q {
        bad.push("interval inside [1, q-1]".to_string());
    }
    if !bad.is_empty() {
        return Err(Error::ConstraintViolated(bad));
    }
    let inst = BilinearInstance::with_indicator(q, offset, n_len, alpha.to_vec())?;
    let lhs = bilinear_form(ctx, &inst)?;

    let fp = make_prime_field(q)?;
    let f = ctx.field();
    let mut acc = ComplexSum::new();
    for a in a_param + 1..=2 * a_param {
        let a_inv = fp.inv(a % q).expect("2A < q");
        for b in b_param + 1..=2 * b_param {
            let ab = fp.mul(a % q, b % q);
            for (i, al) in alpha.iter().enumerate() {
                let am = fp.mul(a % q, i as u64 + 1);
                let inner = csum((0..n_len as u64).map(|j| {
                    let n = fp.sub((offset + j) % q, ab);
                    let arg = fp.mul(am, fp.add(fp.mul(a_inv, n), b % q));
                    ctx.kc(f.embed(arg))
                }));
                acc.add(al * inner);
            }
        }
    }
    let rhs = acc.value() / (a_param * b_param) as f64;
    Ok((lhs - rhs).norm() / (lhs.norm() + 1.0))
}

/// One row of a saving sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub q: u64,
    pub k: usize,
    pub c: u32,
    pub m: usize,
    pub n: usize,
    pub offset: u64,
    pub ensemble: String,
    pub seed: u64,
    pub measured: f64,
    pub trivial: f64,
    pub pv: f64,
    pub thm11: Option<f64>,
    pub thm12: Option<f64>,
    /// `log_q(trivial / measured)`.
    pub gamma: Option<f64>,
    pub plan: Option<(u64, u64)>,
    pub coefficients_exceed_one: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    /// `(M, N, offset)` triples.
    pub shapes: Vec<(usize, usize, u64)>,
    pub ensembles: Vec<Ensemble>,
    pub samples: usize,
    pub seed: u64,
}

/// Evaluates every `(shape, ensemble, sample)`; row `i` uses seed `seed + i`.
pub fn saving_sweep(ctx: &SumProductContext, spec: &SweepSpec) -> Result<Vec<BoundReport>> {
    let q = require_prime(ctx)?;
    let mut jobs = Vec::new();
    for &(m, n, offset) in &spec.shapes {
        for &ens in &spec.ensembles {
            let reps = if ens == Ensemble::AllOnes { 1 } else { spec.samples };
            for _ in 0..reps {
                jobs.push((m, n, offset, ens, spec.seed + jobs.len() as u64));
            }
        }
    }
    jobs.par_iter()
        .map(|&(m, n, offset, ens, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let alpha = ens.sample(m, &mut rng);
            let beta = ens.sample(n, &mut rng);
            let inst = BilinearInstance::new(q, offset, alpha, beta)?;
            let measured = bilinear_form(ctx, &inst)?.norm();
            let trivial = trivial_bound(&inst);
            let norms = inst.norms();
            let plan = plan_parameters_type_ii(m as u64, n as u64, q);
            Ok(BoundReport {
                q,
                k: ctx.k(),
                c: ctx.c().0,
                m,
                n,
                offset,
                ensemble: ens.name().to_string(),
                seed,
                measured,
                trivial,
                pv: pv_bound(&inst, q),
                thm11: thm_type_ii_bound(&inst, q).ok(),
                thm12: thm_type_i_bound(m, n, q, &norms).ok(),
                gamma: (measured > 0.0 && trivial > 0.0).then(|| (trivial / measured).ln() / (q as f64).ln()),
                plan: Some((plan.a, plan.b)),
                coefficients_exceed_one: norms.alpha_max > 1.0 + 1e-12,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::ExtElement;
    use crate::kloosterman::{prime_table, SignConvention};

    fn ctx(k: usize, q: u64, c: u32) -> SumProductContext {
        SumProductContext::new(prime_table(k, q, SignConvention::Intro).unwrap(), ExtElement(c)).unwrap()
    }

    fn unit(n: usize, seed: u64) -> Vec<Complex64> {
        Ensemble::Steinhaus.sample(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn single_term_and_zero() {
        let c = ctx(2, 101, 3);
        let mut alpha = vec![Complex64::new(0.0, 0.0); 4];
        let mut beta = vec![Complex64::new(0.0, 0.0); 6];
        alpha[2] = Complex64::new(1.0, 0.0);
        beta[4] = Complex64::new(1.0, 0.0);
        let inst = BilinearInstance::new(101, 10, alpha.clone(), beta.clone()).unwrap();
        // m0 = 3, n0 = 10 + 4
        let expect = c.table().get(ExtElement((3 * 3 * 14) % 101));
        assert!((bilinear_form(&c, &inst).unwrap() - expect).norm() < 1e-14);
        let zero = BilinearInstance::new(101, 10, vec![Complex64::new(0.0, 0.0); 4], beta).unwrap();
        assert_eq!(bilinear_form(&c, &zero).unwrap(), Complex64::new(0.0, 0.0));
        assert!(BilinearInstance::new(101, 95, alpha, vec![Complex64::new(1.0, 0.0); 7]).is_err());
    }

    #[test]
    fn transposed_loop_oracle() {
        let c = ctx(2, 101, 1);
        let inst = BilinearInstance::new(101, 1, unit(10, 1), unit(10, 2)).unwrap();
        let mut oracle = Complex64::new(0.0, 0.0);
        for (j, b) in inst.beta.iter().enumerate() {
            for (i, a) in inst.alpha.iter().enumerate() {
                oracle += a * b * c.table().get(ExtElement((((i + 1) * (j + 1)) % 101) as u32));
            }
        }
        assert!((bilinear_form(&c, &inst).unwrap() - oracle).norm() < 1e-10);
    }

    #[test]
    fn trivial_and_pv_arithmetic() {
        let inst = BilinearInstance::new(101, 1, unit(10, 3), unit(10, 4)).unwrap();
        assert!((trivial_bound(&inst) - 100.0).abs() < 1e-9);
        let zero = BilinearInstance::new(101, 1, unit(10, 3), vec![Complex64::new(0.0, 0.0); 10]).unwrap();
        assert_eq!(trivial_bound(&zero), 0.0);
        let br = pv_bracket(100.0, 100.0, 1e4);
        let expect = 0.1 + 0.1 + 0.1 * 10.0 * 1e4f64.ln();
        assert!((br.value() - expect).abs() < 1e-12);
    }

    #[test]
    fn type_ii_reproductions() {
        let q = 2003.0;
        assert!((type_ii_saving_at(0.5, q) - 1.0 / 64.0).abs() < 1e-12);
        let cross = crossing_exponent(|t| type_ii_saving_at(t, q), 0.3, 0.6).unwrap();
        assert!((cross - 11.0 / 24.0).abs() < 1e-9);
        assert!(!type_ii_hypotheses(3.0, 2.0, q).is_empty());
        let inst = BilinearInstance::new(2003, 1, unit(2, 1), unit(3, 2)).unwrap();
        assert!(matches!(thm_type_ii_bound(&inst, 2003), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn type_i_reproductions() {
        let q = 2003.0;
        assert!((type_i_saving_at(0.5, q) - 1.0 / 24.0).abs() < 1e-12);
        let cross = crossing_exponent(|t| type_i_saving_at(t, q), 0.3, 0.6).unwrap();
        assert!((cross - 3.0 / 7.0).abs() < 1e-9);
        assert!(matches!(
            thm_type_i_bound(10, 2003, 2003, &Norms::unit(10.0, 2003.0)),
            Err(Error::HypothesisViolated(_))
        ));
        // unit coefficients: bound / MN is the bracket
        let b = thm_type_i_bound(40, 40, 2003, &Norms::unit(40.0, 40.0)).unwrap();
        assert!((b / 1600.0 - type_i_bracket(40.0, 40.0, q).value()).abs() < 1e-12);
    }

    #[test]
    fn type_ii_decreasing_in_n() {
        let q = 1e6;
        for m in [10.0, 50.0, 200.0] {
            let mut prev = f64::INFINITY;
            let mut n = 40.0;
            while n < 2e4 {
                if type_ii_hypotheses(m, n, q).is_empty() {
                    let v = type_ii_bracket(m, n, q).value();
                    assert!(v < prev);
                    prev = v;
                }
                n *= 1.3;
            }
        }
    }

    #[test]
    fn operator_norm_small_cases() {
        let c = ctx(2, 101, 1);
        let one = operator_norm(&c, 1, 1, 7).unwrap();
        assert!((one.sigma_max - c.table().get(ExtElement(7)).norm()).abs() < 1e-9);
        let op = operator_norm(&c, 8, 9, 1).unwrap();
        for seed in 0..10 {
            let inst = BilinearInstance::new(101, 1, unit(8, seed), unit(9, seed + 100)).unwrap();
            let nr = inst.norms();
            let ratio = bilinear_form(&c, &inst).unwrap().norm() / (nr.alpha_l2 * nr.beta_l2);
            assert!(ratio <= op.sigma_max * (1.0 + 1e-9));
        }
    }

    #[test]
    fn shift_identity_cases() {
        let c = ctx(2, 101, 1);
        let alpha = unit(5, 1);
        assert!(shift_identity_check(&c, &alpha, 1, 20, 1, 1).unwrap() < 1e-9);
        assert!(shift_identity_check(&c, &alpha, 1, 20, 2, 3).unwrap() < 1e-9);
        assert!(matches!(
            shift_identity_check(&c, &alpha, 1, 20, 1, 51),
            Err(Error::ConstraintViolated(_))
        ));
    }

    #[test]
    fn parameter_plans() {
        let p = plan_parameters_type_i(8, 64, 10007);
        assert_eq!((p.a, p.b), (8, 8));
        assert!(p.flags.all());
        let p = plan_parameters_type_ii(100, 100, 10_000);
        assert_eq!((p.a, p.b), (3, 32));
        assert!((p.a_real * p.b_real - 100.0).abs() < 1e-9);
        let p = plan_parameters_type_i(27, 27, 10007);
        assert_eq!((p.a, p.b), (3, 9));
    }

    #[test]
    fn sweep_is_deterministic() {
        let c = ctx(2, 2003, 1);
        let spec = SweepSpec {
            shapes: vec![(45, 45, 1)],
            ensembles: Ensemble::ALL.to_vec(),
            samples: 3,
            seed: 9,
        };
        let a = saving_sweep(&c, &spec).unwrap();
        let b = saving_sweep(&c, &spec).unwrap();
        assert_eq!(a.len(), 7);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.measured, y.measured);
            assert!(x.measured <= x.trivial * 2.0);
        }
    }
}
