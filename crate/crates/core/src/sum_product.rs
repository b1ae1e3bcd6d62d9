//! Sum-of-products transforms of a Kloosterman table.
//!
//! For a shift tuple `b = (b1, b2, b3, b4)` the basic object is
//!
//! ```text
//! K(r, s, lambda, b) = psi(lambda s) K(s(r+b1)) K(s(r+b2)) conj(K(s(r+b3))) conj(K(s(r+b4)))
//! ```
//!
//! with `K = [x c]^* Kl_k`, and `R(r, lambda, b) = sum_{s in F} K(r, s, lambda, b)`.
//! Everything else in this module is a sum or a moment of these two.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_field::{ExtElement, ExtField};
use crate::kloosterman::KloostermanTable;
use crate::numeric::{csum, rsum, ComplexSum, CompensatedSum};

/// Default work cap (number of product evaluations) for incomplete sums.
pub const DEFAULT_RANGE_CAP: u64 = 200_000_000;

/// Symmetry type of the Kloosterman sheaf, fixed by the parity of `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParityClass {
    /// `k` even.
    Sp,
    /// `k` odd.
    Sl,
}

impl ParityClass {
    pub fn of(k: usize) -> Self {
        if k % 2 == 0 {
            ParityClass::Sp
        } else {
            ParityClass::Sl
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TupleClass {
    Diagonal,
    Generic,
}

/// A shift tuple together with its diagonal classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftTuple {
    pub b: [ExtElement; 4],
    pub parity: ParityClass,
    pub classification: TupleClass,
}

impl ShiftTuple {
    pub fn new(b: [ExtElement; 4], k: usize) -> Self {
        ShiftTuple {
            b,
            parity: ParityClass::of(k),
            classification: classify_tuple(&b, k),
        }
    }

    pub fn from_residues(field: &ExtField, b: [i64; 4], k: usize) -> Self {
        Self::new(b.map(|x| field.embed_int(x)), k)
    }

    pub fn is_diagonal(&self) -> bool {
        self.classification == TupleClass::Diagonal
    }
}

/// Membership in the diagonal variety.
///
/// `Sp` (k even): every value occurs an even number of times among the four
/// entries. `Sl` (k odd): each of `b1, b2` occurs as often among `(b1, b2)` as
/// among `(b3, b4)`.
pub fn classify_tuple(b: &[ExtElement; 4], k: usize) -> TupleClass {
    let diagonal = match ParityClass::of(k) {
        ParityClass::Sp => (0..4).all(|i| b.iter().filter(|&&x| x == b[i]).count() % 2 == 0),
        ParityClass::Sl => (0..2).all(|i| {
            let front = b[..2].iter().filter(|&&x| x == b[i]).count();
            let back = b[2..].iter().filter(|&&x| x == b[i]).count();
            front == back
        }),
    };
    if diagonal {
        TupleClass::Diagonal
    } else {
        TupleClass::Generic
    }
}

fn pairwise_distinct(b: &[ExtElement; 4]) -> bool {
    (0..4).all(|i| (i + 1..4).all(|j| b[i] != b[j]))
}

/// A Kloosterman table together with the multiplicative twist `c`.
#[derive(Debug, Clone)]
pub struct SumProductContext {
    table: KloostermanTable,
    c: ExtElement,
    twisted: Vec<Complex64>,
}

impl SumProductContext {
    pub fn new(table: KloostermanTable, c: ExtElement) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::ZeroScale);
        }
        let f = table.field();
        let twisted = f.elements().map(|a| table.get(f.mul(c, a))).collect();
        Ok(SumProductContext { table, c, twisted })
    }

    pub fn untwisted(table: KloostermanTable) -> Self {
        Self::new(table, ExtElement::ONE).expect("1 is non-zero")
    }

    pub fn table(&self) -> &KloostermanTable {
        &self.table
    }

    pub fn field(&self) -> &ExtField {
        self.table.field()
    }

    pub fn k(&self) -> usize {
        self.table.k()
    }

    pub fn c(&self) -> ExtElement {
        self.c
    }

    /// Number of field elements `q^d`.
    pub fn size(&self) -> usize {
        self.field().size()
    }

    /// `K_c(x) = Kl_k(c x)`.
    #[inline]
    pub fn kc(&self, x: ExtElement) -> Complex64 {
        self.twisted[x.index()]
    }

    fn require_prime_field(&self) -> Result<()> {
        if self.field().degree() == 1 {
            Ok(())
        } else {
            Err(Error::NeedPrimeField)
        }
    }

    #[inline]
    fn shifted(&self, r: ExtElement, b: &[ExtElement; 4]) -> [ExtElement; 4] {
        let f = self.field();
        b.map(|bi| f.add(r, bi))
    }

    /// Product `K(s x1) K(s x2) conj K(s x3) conj K(s x4)` for pre-shifted `x`.
    #[inline]
    fn product(&self, s: ExtElement, x: &[ExtElement; 4]) -> Complex64 {
        let f = self.field();
        let k1 = self.kc(f.mul(s, x[0]));
        let k2 = self.kc(f.mul(s, x[1]));
        let k3 = self.kc(f.mul(s, x[2]));
        let k4 = self.kc(f.mul(s, x[3]));
        k1 * k2 * (k3 * k4).conj()
    }
}

/// `K(r, s, lambda, b)`.
pub fn big_k(
    ctx: &SumProductContext,
    r: ExtElement,
    s: ExtElement,
    lambda: ExtElement,
    b: &[ExtElement; 4],
) -> Complex64 {
    let x = ctx.shifted(r, b);
    ctx.field().psi(lambda, s) * ctx.product(s, &x)
}

/// `R(r, lambda, b)`, summed over all `s` (the `s = 0` term vanishes).
pub fn big_r(ctx: &SumProductContext, r: ExtElement, lambda: ExtElement, b: &[ExtElement; 4]) -> Complex64 {
    let f = ctx.field();
    let x = ctx.shifted(r, b);
    let mut acc = ComplexSum::new();
    for s in f.nonzero() {
        acc.add(f.psi(lambda, s) * ctx.product(s, &x));
    }
    acc.value()
}

/// `R(r, lambda, b)` for every `r`, indexed by encoding.
pub fn r_vector(ctx: &SumProductContext, lambda: ExtElement, b: &[ExtElement; 4]) -> Vec<Complex64> {
    let f = ctx.field();
    let chars: Vec<Complex64> = f.elements().map(|s| f.psi(lambda, s)).collect();
    f.elements()
        .map(|r| {
            let x = ctx.shifted(r, b);
            let mut acc = ComplexSum::new();
            for s in f.nonzero() {
                acc.add(chars[s.index()] * ctx.product(s, &x));
            }
            acc.value()
        })
        .collect()
}

/// `Sigma(K_c, b; AM)`: sum over `r mod q` and `1 <= s <= 2AM`.
pub fn sigma_incomplete(
    ctx: &SumProductContext,
    b: &[ExtElement; 4],
    a_param: u64,
    m_param: u64,
    cap: u64,
) -> Result<Complex64> {
    ctx.require_prime_field()?;
    let s_max = 2 * a_param * m_param;
    let q = ctx.field().q();
    if (s_max as u128) * (q as u128) > cap as u128 {
        return Err(Error::RangeTooLarge(format!("2AM = {s_max} with q = {q} exceeds cap {cap}")));
    }
    let f = ctx.field();
    let mut acc = ComplexSum::new();
    for r in f.elements() {
        let x = ctx.shifted(r, b);
        for s in 1..=s_max {
            acc.add(ctx.product(f.embed(s), &x));
        }
    }
    Ok(acc.value())
}

/// `Sigma^{!=}(K_c, b; AM)`: sum over `r mod q` and `1 <= s1, s2 <= AM`, `s1 != s2 mod q`.
///
/// Uses `sum_{s1 != s2} v1 conj(v2) = |sum v|^2 - sum_{residues} |sum_{s = res} v|^2`.
pub fn sigma_neq(ctx: &SumProductContext, b: &[ExtElement; 4], am: u64, cap: u64) -> Result<Complex64> {
    ctx.require_prime_field()?;
    let q = ctx.field().q();
    if (am as u128) * (q as u128) > cap as u128 {
        return Err(Error::RangeTooLarge(format!("AM = {am} with q = {q} exceeds cap {cap}")));
    }
    let f = ctx.field();
    let mut total = ComplexSum::new();
    let mut by_residue = vec![Complex64::new(0.0, 0.0); q as usize];
    for r in f.elements() {
        let x = ctx.shifted(r, b);
        by_residue.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for s in 1..=am {
            by_residue[(s % q) as usize] += ctx.product(f.embed(s), &x);
        }
        let full = csum(by_residue.iter().copied());
        total.add(Complex64::new(full.norm_sqr(), 0.0));
        for z in &by_residue {
            total.add(Complex64::new(-z.norm_sqr(), 0.0));
        }
    }
    Ok(total.value())
}

/// `sum_{r} K(r, s, 0, b)` for fixed non-zero `s`.
pub fn complete_sum_over_r(ctx: &SumProductContext, s: ExtElement, b: &[ExtElement; 4]) -> Result<Complex64> {
    if s.is_zero() {
        return Err(Error::ZeroS);
    }
    Ok(csum(ctx.field().elements().map(|r| ctx.product(s, &ctx.shifted(r, b)))))
}

/// `sum_{r} K(r, s1, 0, b) conj K(r, s2, 0, b)` for distinct non-zero `s1, s2`.
pub fn complete_corr_over_r(
    ctx: &SumProductContext,
    s1: ExtElement,
    s2: ExtElement,
    b: &[ExtElement; 4],
) -> Result<Complex64> {
    if s1.is_zero() || s2.is_zero() || s1 == s2 {
        return Err(Error::BadPair);
    }
    Ok(csum(ctx.field().elements().map(|r| {
        let x = ctx.shifted(r, b);
        ctx.product(s1, &x) * ctx.product(s2, &x).conj()
    })))
}

/// `sum_r R(r, lambda, b)`.
pub fn r_linear_sum(ctx: &SumProductContext, lambda: ExtElement, b: &[ExtElement; 4]) -> Complex64 {
    csum(r_vector(ctx, lambda, b))
}

/// `sum_r R(r, lambda1, b) conj R(r, lambda2, b)`.
pub fn r_correlation(
    ctx: &SumProductContext,
    lambda1: ExtElement,
    lambda2: ExtElement,
    b: &[ExtElement; 4],
) -> Complex64 {
    let v1 = r_vector(ctx, lambda1, b);
    if lambda1 == lambda2 {
        return Complex64::new(rsum(v1.iter().map(|z| z.norm_sqr())), 0.0);
    }
    let v2 = r_vector(ctx, lambda2, b);
    csum(v1.iter().zip(&v2).map(|(a, b)| a * b.conj()))
}

/// `q^{-2d} sum_{r, lambda} |R(r, lambda, b)|^2` through the Plancherel shortcut
/// `q^{-d} sum_{r, s} |K(r, s, 0, b)|^2`.
pub fn second_moment_r_lambda(ctx: &SumProductContext, b: &[ExtElement; 4]) -> Result<f64> {
    if !pairwise_distinct(b) {
        return Err(Error::NotDistinct);
    }
    let f = ctx.field();
    let mut acc = CompensatedSum::new();
    for r in f.elements() {
        let x = ctx.shifted(r, b);
        for s in f.nonzero() {
            acc.add(ctx.product(s, &x).norm_sqr());
        }
    }
    Ok(acc.value() / f.size() as f64)
}

/// The defining double sum of [`second_moment_r_lambda`], `O(q^{3d})`.
pub fn second_moment_r_lambda_naive(ctx: &SumProductContext, b: &[ExtElement; 4]) -> Result<f64> {
    if !pairwise_distinct(b) {
        return Err(Error::NotDistinct);
    }
    let f = ctx.field();
    let mut acc = CompensatedSum::new();
    for r in f.elements() {
        for lambda in f.elements() {
            acc.add(big_r(ctx, r, lambda, b).norm_sqr());
        }
    }
    Ok(acc.value() / (f.size() as f64).powi(2))
}

/// `q^{-2d} sum_{r, lambda} R(r, lambda, b) conj R(r, -lambda, b)`, for odd `k`.
///
/// Evaluated through `q^{-d} sum_{r, s} K(r, s, 0, b) conj K(r, -s, 0, b)`.
pub fn noncorrelation_moment(ctx: &SumProductContext, b: &[ExtElement; 4]) -> Result<Complex64> {
    if ctx.k() % 2 == 0 {
        return Err(Error::WrongParity(ctx.k()));
    }
    if !pairwise_distinct(b) {
        return Err(Error::NotDistinct);
    }
    let f = ctx.field();
    let mut acc = ComplexSum::new();
    for r in f.elements() {
        let x = ctx.shifted(r, b);
        for s in f.nonzero() {
            acc.add(ctx.product(s, &x) * ctx.product(f.neg(s), &x).conj());
        }
    }
    Ok(acc.value() / f.size() as f64)
}

/// The defining double sum of [`noncorrelation_moment`].
pub fn noncorrelation_moment_naive(ctx: &SumProductContext, b: &[ExtElement; 4]) -> Result<Complex64> {
    if ctx.k() % 2 == 0 {
        return Err(Error::WrongParity(ctx.k()));
    }
    if !pairwise_distinct(b) {
        return Err(Error::NotDistinct);
    }
    let f = ctx.field();
    let mut acc = ComplexSum::new();
    for r in f.elements() {
        for lambda in f.elements() {
            acc.add(big_r(ctx, r, lambda, b) * big_r(ctx, r, f.neg(lambda), b).conj());
        }
    }
    Ok(acc.value() / (f.size() as f64).powi(2))
}

/// Correlation sum `C(K, s, s') = q^{-d} sum_b K(s b) conj K(s' b)`.
pub fn correlation_sum(ctx: &SumProductContext, s: ExtElement, s2: ExtElement) -> Complex64 {
    let f = ctx.field();
    csum(f.elements().map(|b| ctx.kc(f.mul(s, b)) * ctx.kc(f.mul(s2, b)).conj())) / f.size() as f64
}

/// `q^{-5d} sum_{r, b} |R(r, 0, b)|^2` via `sum_{s, s'} |C(K,s,s')|^2 |C(K,s',s)|^2`.
///
/// `C(K, s, s')` depends on `s / s'` only, so the double sum collapses to
/// `(q^d - 1) sum_u |C(K, u, 1)|^4`.
pub fn full_average_moment(ctx: &SumProductContext) -> Result<f64> {
    let f = ctx.field();
    if (f.size() as u128).pow(2) > DEFAULT_RANGE_CAP as u128 {
        return Err(Error::ResourceLimit(format!("q^(2d) = {}^2", f.size())));
    }
    let quartic: Vec<f64> = f
        .nonzero()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&u| {
            let c = correlation_sum(ctx, u, ExtElement::ONE);
            let c_rev = correlation_sum(ctx, ExtElement::ONE, u);
            c.norm_sqr() * c_rev.norm_sqr()
        })
        .collect();
    Ok(f.order() as f64 * rsum(quartic))
}

/// The defining five-fold average of [`full_average_moment`], `O(q^{6d})`.
pub fn full_average_moment_naive(ctx: &SumProductContext, cap: u64) -> Result<f64> {
    let f = ctx.field();
    let n = f.size() as u128;
    if n.pow(6) > cap as u128 {
        return Err(Error::ResourceLimit(format!("q^(6d) = {}^6 exceeds cap {cap}", f.size())));
    }
    let elems: Vec<ExtElement> = f.elements().collect();
    let per_b1: Vec<f64> = elems
        .par_iter()
        .map(|&b1| {
            let mut acc = CompensatedSum::new();
            for &b2 in &elems {
                for &b3 in &elems {
                    for &b4 in &elems {
                        let b = [b1, b2, b3, b4];
                        for &r in &elems {
                            acc.add(big_r(ctx, r, ExtElement::ZERO, &b).norm_sqr());
                        }
                    }
                }
            }
            acc.value()
        })
        .collect();
    Ok(rsum(per_b1) / (f.size() as f64).powi(5))
}

/// Named normalized statistics used by ratio scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    /// `|sum_r K(r, s, 0, b)| / q^{1/2}`.
    CompleteSumOverR,
    /// `|sum_r K(r,s1,0,b) conj K(r,s2,0,b)| / q^{1/2}`.
    CompleteCorrOverR,
    /// `|sum_r R(r, lambda, b)| / q`.
    RLinearSum,
    /// `|sum_r R(r, lambda, b) conj R(r, lambda', b)| / q^{3/2}`, `lambda != lambda'`.
    RCorrelationOffDiagonal,
    /// `|sum_r |R(r, lambda, b)|^2 - q^2| / q^{3/2}`.
    RCorrelationDiagonal,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::CompleteSumOverR,
        Statistic::CompleteCorrOverR,
        Statistic::RLinearSum,
        Statistic::RCorrelationOffDiagonal,
        Statistic::RCorrelationDiagonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::CompleteSumOverR => "complete_sum_over_r",
            Statistic::CompleteCorrOverR => "complete_corr_over_r",
            Statistic::RLinearSum => "r_linear_sum",
            Statistic::RCorrelationOffDiagonal => "r_correlation_offdiag",
            Statistic::RCorrelationDiagonal => "r_correlation_diag",
        }
    }

    /// Power of `q` divided out.
    pub fn normalization_exponent(self) -> f64 {
        match self {
            Statistic::CompleteSumOverR | Statistic::CompleteCorrOverR => 0.5,
            Statistic::RLinearSum => 1.0,
            Statistic::RCorrelationOffDiagonal | Statistic::RCorrelationDiagonal => 1.5,
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Statistic::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown statistic {s:?}"))
    }
}

/// One sampled evaluation of a statistic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioSample {
    pub b: [u32; 4],
    pub s_or_lambda: [u32; 2],
    pub value: Complex64,
    pub ratio: f64,
}

/// Aggregate of a seeded ratio scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioReport {
    pub statistic: String,
    pub q: u64,
    pub d: usize,
    pub k: usize,
    pub c: u32,
    pub samples: usize,
    pub seed: u64,
    pub normalization_exponent: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub rows: Vec<RatioSample>,
}

/// Draws a uniformly random non-diagonal tuple.
pub fn random_generic_tuple<R: Rng>(rng: &mut R, field: &ExtField, k: usize) -> [ExtElement; 4] {
    loop {
        let b = [(); 4].map(|_| ExtElement(rng.gen_range(0..field.size() as u32)));
        if classify_tuple(&b, k) == TupleClass::Generic {
            return b;
        }
    }
}

/// Uniform draw with pairwise distinct coordinates, which is generic for either parity.
/// Tuples with a repeated coordinate form a hyperplane family on which the
/// diagonal statistics pick up an extra factor of about `q^{1/2}`.
pub fn random_distinct_tuple<R: Rng>(rng: &mut R, field: &ExtField) -> [ExtElement; 4] {
    loop {
        let b = [(); 4].map(|_| ExtElement(rng.gen_range(0..field.size() as u32)));
        if pairwise_distinct(&b) {
            return b;
        }
    }
}

/// Evaluates `stat` on `samples` seeded draws with distinct coordinates.
pub fn ratio_scan(ctx: &SumProductContext, stat: Statistic, samples: usize, seed: u64) -> RatioReport {
    let f = ctx.field();
    let n = f.size() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<([ExtElement; 4], [ExtElement; 2])> = (0..samples)
        .map(|_| {
            let b = random_distinct_tuple(&mut rng, f);
            let params = match stat {
                Statistic::CompleteSumOverR => [ExtElement(rng.gen_range(1..n)), ExtElement::ZERO],
                Statistic::CompleteCorrOverR => {
                    let s1 = rng.gen_range(1..n);
                    let s2 = loop {
                        let s = rng.gen_range(1..n);
                        if s != s1 {
                            break s;
                        }
                    };
                    [ExtElement(s1), ExtElement(s2)]
                }
                Statistic::RLinearSum | Statistic::RCorrelationDiagonal => {
                    [ExtElement(rng.gen_range(0..n)), ExtElement::ZERO]
                }
                Statistic::RCorrelationOffDiagonal => {
                    let l1 = rng.gen_range(0..n);
                    let l2 = loop {
                        let l = rng.gen_range(0..n);
                        if l != l1 {
                            break l;
                        }
                    };
                    [ExtElement(l1), ExtElement(l2)]
                }
            };
            (b, params)
        })
        .collect();

    let qd = f.size() as f64;
    let norm = qd.powf(stat.normalization_exponent());
    let rows: Vec<RatioSample> = draws
        .par_iter()
        .map(|(b, p)| {
            let value = match stat {
                Statistic::CompleteSumOverR => complete_sum_over_r(ctx, p[0], b).expect("s != 0"),
                Statistic::CompleteCorrOverR => complete_corr_over_r(ctx, p[0], p[1], b).expect("valid pair"),
                Statistic::RLinearSum => r_linear_sum(ctx, p[0], b),
                Statistic::RCorrelationDiagonal => r_correlation(ctx, p[0], p[0], b),
                Statistic::RCorrelationOffDiagonal => r_correlation(ctx, p[0], p[1], b),
            };
            let ratio = match stat {
                Statistic::RCorrelationDiagonal => (value.re - qd * qd).abs() / norm,
                _ => value.norm() / norm,
            };
            RatioSample {
                b: b.map(|x| x.0),
                s_or_lambda: p.map(|x| x.0),
                value,
                ratio,
            }
        })
        .collect();
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let mean_ratio = if rows.is_empty() {
        0.0
    } else {
        rsum(rows.iter().map(|r| r.ratio)) / rows.len() as f64
    };
    RatioReport {
        statistic: stat.name().to_string(),
        q: f.q(),
        d: f.degree(),
        k: ctx.k(),
        c: ctx.c().0,
        samples,
        seed,
        normalization_exponent: stat.normalization_exponent(),
        max_ratio,
        mean_ratio,
        rows,
    }
}

/// How tuples are drawn for [`scan_bad_tuples`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleSpec {
    /// Every tuple up to translation (`b1 = 0`).
    Exhaustive,
    /// Seeded uniform tuples.
    Random { count: usize, seed: u64 },
    /// Exhaustive for `q <= 31`, otherwise 2000 seeded tuples.
    Auto { seed: u64 },
}

/// Per-statistic ratio thresholds; `None` means `factor x median` of the sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanThresholds {
    pub fixed: Option<[f64; 5]>,
    pub median_factor: f64,
}

impl Default for ScanThresholds {
    fn default() -> Self {
        ScanThresholds {
            fixed: None,
            median_factor: 3.0,
        }
    }
}

impl ScanThresholds {
    pub fn infinite() -> Self {
        ScanThresholds {
            fixed: Some([f64::INFINITY; 5]),
            median_factor: 3.0,
        }
    }
}

/// Statistic names evaluated by the bad-tuple scan, in column order.
pub const SCAN_STATISTICS: [&str; 5] = [
    "r_linear_l0",
    "r_linear_l1",
    "r_corr_diag_l0",
    "r_corr_diag_l1",
    "r_corr_cross_l0_l1",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlaggedTuple {
    pub b: [u32; 4],
    pub statistic: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BadTupleScan {
    pub q: u64,
    pub k: usize,
    pub tuples_examined: usize,
    pub exhaustive: bool,
    pub thresholds: [f64; 5],
    pub medians: [f64; 5],
    pub flagged: Vec<FlaggedTuple>,
    pub diagonal_count: usize,
    pub flagged_fraction: f64,
    /// `1/q`, the order of magnitude expected for a codimension-one exceptional set.
    pub expected_fraction: f64,
}

fn scan_ratios(ctx: &SumProductContext, b: &[ExtElement; 4]) -> [f64; 5] {
    let q = ctx.field().size() as f64;
    let v0 = r_vector(ctx, ExtElement::ZERO, b);
    let v1 = r_vector(ctx, ExtElement::ONE, b);
    let lin0 = csum(v0.iter().copied()).norm() / q;
    let lin1 = csum(v1.iter().copied()).norm() / q;
    let n32 = q.powf(1.5);
    let d0 = (rsum(v0.iter().map(|z| z.norm_sqr())) - q * q).abs() / n32;
    let d1 = (rsum(v1.iter().map(|z| z.norm_sqr())) - q * q).abs() / n32;
    let cross = csum(v0.iter().zip(&v1).map(|(a, b)| a * b.conj())).norm() / n32;
    [lin0, lin1, d0, d1, cross]
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Probes the exceptional set of shift tuples empirically.
///
/// Every diagonal tuple is flagged; a generic tuple is flagged when one of the
/// [`SCAN_STATISTICS`] exceeds its threshold. All statistics are invariant under
/// `b -> b + (t, t, t, t)`, which the exhaustive mode exploits by fixing `b1 = 0`.
pub fn scan_bad_tuples(
    ctx: &SumProductContext,
    thresholds: ScanThresholds,
    sample: SampleSpec,
) -> Result<BadTupleScan> {
    ctx.require_prime_field()?;
    let f = ctx.field();
    let q = f.q();
    let k = ctx.k();
    let (tuples, exhaustive): (Vec<[ExtElement; 4]>, bool) = match sample {
        SampleSpec::Exhaustive => (exhaustive_tuples(f), true),
        SampleSpec::Auto { seed } if q > 31 => (random_tuples(f, 2000, seed), false),
        SampleSpec::Auto { .. } => (exhaustive_tuples(f), true),
        SampleSpec::Random { count, seed } => (random_tuples(f, count, seed), false),
    };
    let diag: Vec<bool> = tuples
        .iter()
        .map(|b| classify_tuple(b, k) == TupleClass::Diagonal)
        .collect();
    let ratios: Vec<Option<[f64; 5]>> = tuples
        .par_iter()
        .zip(diag.par_iter())
        .map(|(b, &is_diag)| (!is_diag).then(|| scan_ratios(ctx, b)))
        .collect();

    let mut medians = [0.0; 5];
    for (j, m) in medians.iter_mut().enumerate() {
        *m = median(ratios.iter().flatten().map(|r| r[j]).collect());
    }
    let limits = thresholds
        .fixed
        .unwrap_or_else(|| medians.map(|m| m * thresholds.median_factor));

    let mut flagged = Vec::new();
    let mut diagonal_count = 0;
    for ((b, &is_diag), r) in tuples.iter().zip(&diag).zip(&ratios) {
        let enc = b.map(|x| x.0);
        if is_diag {
            diagonal_count += 1;
            flagged.push(FlaggedTuple {
                b: enc,
                statistic: "diagonal".into(),
                ratio: f64::NAN,
            });
            continue;
        }
        let r = r.expect("generic tuples are evaluated");
        if let Some(j) = (0..5).find(|&j| r[j] > limits[j]) {
            flagged.push(FlaggedTuple {
                b: enc,
                statistic: SCAN_STATISTICS[j].into(),
                ratio: r[j],
            });
        }
    }
    let n = tuples.len().max(1);
    Ok(BadTupleScan {
        q,
        k,
        tuples_examined: tuples.len(),
        exhaustive,
        thresholds: limits,
        medians,
        flagged_fraction: flagged.len() as f64 / n as f64,
        flagged,
        diagonal_count,
        expected_fraction: 1.0 / q as f64,
    })
}

fn exhaustive_tuples(f: &ExtField) -> Vec<[ExtElement; 4]> {
    let mut out = Vec::with_capacity(f.size().pow(3));
    for b2 in f.elements() {
        for b3 in f.elements() {
            for b4 in f.elements() {
                out.push([ExtElement::ZERO, b2, b3, b4]);
            }
        }
    }
    out
}

fn random_tuples(f: &ExtField, count: usize, seed: u64) -> Vec<[ExtElement; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| [(); 4].map(|_| ExtElement(rng.gen_range(0..f.size() as u32))))
        .collect()
}
