//! Hyper-Kloosterman sums `Kl_k(a; F_{q^d})`.
//!
//! Two independent routes are provided:
//!
//! * [`kloosterman_naive`] enumerates every `(k-1)`-tuple of non-zero elements,
//!   closes the product constraint with a field division, and buckets the
//!   traces of the tuple sums before a single character sum;
//! * [`kloosterman_table`] builds the whole table as the `(k-1)`-fold cyclic
//!   convolution of `psi` with itself on `F_{q^d}^x`, indexed by discrete log.
//!
//! Normalization is `q^{-d(k-1)/2}`; the value at `a = 0` is fixed to zero.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_field::{build_extension, make_prime_field, ExtElement, ExtField};
use crate::numeric::{tolerance_budget, ComplexSum};

/// Largest `q^d` for which the schoolbook convolution is used by default.
pub const SCHOOLBOOK_LIMIT: usize = 5000;

/// Default cap on the number of tuples the naive evaluator may enumerate per value.
pub const NAIVE_DEFAULT_CAP: u64 = 50_000_000;

/// Overall sign applied to the normalized sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignConvention {
    /// No sign: the normalization used for bilinear forms and applications.
    Intro,
    /// Multiplied by `(-1)^{k-1}`, the trace function of the Kloosterman sheaf.
    Sheaf,
}

impl SignConvention {
    pub fn sign(self, k: usize) -> f64 {
        match self {
            SignConvention::Intro => 1.0,
            SignConvention::Sheaf => {
                if k % 2 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SignConvention::Intro => "intro",
            SignConvention::Sheaf => "sheaf",
        }
    }

    fn code(self) -> u8 {
        match self {
            SignConvention::Intro => 0,
            SignConvention::Sheaf => 1,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(SignConvention::Intro),
            1 => Some(SignConvention::Sheaf),
            _ => None,
        }
    }
}

impl std::str::FromStr for SignConvention {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [SignConvention::Intro, SignConvention::Sheaf]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown sign convention {s:?}"))
    }
}

/// Which convolution kernel builds the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionPath {
    Schoolbook,
    Fft,
    /// Schoolbook up to [`SCHOOLBOOK_LIMIT`], FFT above.
    Auto,
}

/// `Kl_k(a; F_{q^d})` for every `a`, indexed by element encoding.
#[derive(Debug, Clone)]
pub struct KloostermanTable {
    k: usize,
    field: Arc<ExtField>,
    convention: SignConvention,
    values: Vec<Complex64>,
    tolerance: f64,
}

impl KloostermanTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> &ExtField {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<ExtField> {
        Arc::clone(&self.field)
    }

    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Rounding budget `N_terms * 1e-15` for this table's entries.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    #[inline]
    pub fn get(&self, a: ExtElement) -> Complex64 {
        self.values[a.index()]
    }

    /// `q^{d(k-1)/2}`, the factor between normalized and raw sums.
    pub fn normalization(&self) -> f64 {
        normalization(&self.field, self.k)
    }

    /// `max_a |Kl_k(a)|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `sum_{a != 0}` of the unnormalized sums, without the sign convention.
    pub fn complete_sum(&self) -> Complex64 {
        let scale = self.normalization() * self.convention.sign(self.k);
        let mut acc = ComplexSum::new();
        for v in &self.values[1..] {
            acc.add(v * scale);
        }
        acc.value()
    }

    pub fn with_convention(&self, convention: SignConvention) -> KloostermanTable {
        let factor = convention.sign(self.k) * self.convention.sign(self.k);
        KloostermanTable {
            convention,
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

fn normalization(field: &ExtField, k: usize) -> f64 {
    (field.size() as f64).powf((k as f64 - 1.0) / 2.0)
}

/// Single value `Kl_k(a)` by direct enumeration of the product-constrained tuples.
///
/// Costs `(q^d - 1)^{k-1}` field operations; refuses when that exceeds `cap`.
pub fn kloosterman_naive(
    k: usize,
    a: ExtElement,
    field: &ExtField,
    convention: SignConvention,
    cap: u64,
) -> Result<Complex64> {
    if k < 2 {
        return Err(Error::BadK);
    }
    let units = field.order() as u64;
    let work = (units as u128).pow(k as u32 - 1);
    if work > cap as u128 {
        return Err(Error::ResourceLimit(format!(
            "naive Kl_{k} over F_{}^{} needs {work} tuples (cap {cap})",
            field.q(),
            field.degree()
        )));
    }
    if a.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let q = field.q() as usize;
    let mut counts = vec![0u64; q];
    // inverses by Fermat powering with polynomial multiplication
    let inverse: Vec<ExtElement> = field
        .elements()
        .map(|x| {
            if x.is_zero() {
                return x;
            }
            let mut e = field.size() as u64 - 2;
            let (mut acc, mut b) = (ExtElement::ONE, x);
            while e > 0 {
                if e & 1 == 1 {
                    acc = field.mul_poly(acc, b);
                }
                b = field.mul_poly(b, b);
                e >>= 1;
            }
            acc
        })
        .collect();
    // Odometer over the prefix (x_1, ..., x_{k-2}); the inner loop runs x_{k-1}
    // over F^x with x_k = (a / prefix) / x_{k-1}.
    let m = k - 2;
    let units: Vec<(ExtElement, usize)> = field
        .nonzero()
        .map(|x| (inverse[x.index()], field.trace(x) as usize))
        .collect();
    let mut xs = vec![ExtElement::ONE; m];
    let mut prods = vec![ExtElement::ONE; m + 1];
    let mut traces = vec![0usize; m + 1];
    for i in 0..m {
        prods[i + 1] = field.mul_poly(prods[i], xs[i]);
        traces[i + 1] = (traces[i] + field.trace(xs[i]) as usize) % q;
    }
    loop {
        let head = field.mul_poly(a, inverse[prods[m].index()]);
        let t0 = traces[m];
        for &(x_inv, tx) in &units {
            let last = field.mul_poly(head, x_inv);
            counts[(t0 + tx + field.trace(last) as usize) % q] += 1;
        }

        let mut level = m;
        loop {
            if level == 0 {
                return Ok(finish_naive(field, k, convention, &counts));
            }
            level -= 1;
            let next = xs[level].0 + 1;
            if (next as usize) < field.size() {
                xs[level] = ExtElement(next);
                break;
            }
            xs[level] = ExtElement::ONE;
        }
        for i in level..m {
            prods[i + 1] = field.mul_poly(prods[i], xs[i]);
            traces[i + 1] = (traces[i] + field.trace(xs[i]) as usize) % q;
        }
    }
}

fn finish_naive(field: &ExtField, k: usize, conv: SignConvention, counts: &[u64]) -> Complex64 {
    let mut acc = ComplexSum::new();
    for (t, &c) in counts.iter().enumerate() {
        acc.add(field.unit_root(t as u64) * c as f64);
    }
    acc.value() * (conv.sign(k) / normalization(field, k))
}

/// Full table by iterated multiplicative convolution, choosing the kernel automatically.
pub fn kloosterman_table(
    k: usize,
    field: Arc<ExtField>,
    convention: SignConvention,
) -> Result<KloostermanTable> {
    kloosterman_table_with(k, field, convention, ConvolutionPath::Auto)
}

/// Convenience constructor for `F_q` (d = 1).
pub fn prime_table(k: usize, q: u64, convention: SignConvention) -> Result<KloostermanTable> {
    let f = Arc::new(build_extension(&make_prime_field(q)?, 1)?);
    kloosterman_table(k, f, convention)
}

pub fn kloosterman_table_with(
    k: usize,
    field: Arc<ExtField>,
    convention: SignConvention,
    path: ConvolutionPath,
) -> Result<KloostermanTable> {
    if k < 2 {
        return Err(Error::BadK);
    }
    let n = field.order();
    let base: Vec<Complex64> = (0..n).map(|i| field.psi1(field.exp(i))).collect();
    let use_fft = match path {
        ConvolutionPath::Schoolbook => false,
        ConvolutionPath::Fft => true,
        ConvolutionPath::Auto => field.size() > SCHOOLBOOK_LIMIT,
    };
    let raw = if use_fft {
        convolve_power_fft(&base, k)
    } else {
        convolve_power_schoolbook(&base, k)
    };
    let scale = convention.sign(k) / normalization(&field, k);
    let mut values = vec![Complex64::new(0.0, 0.0); field.size()];
    for (j, v) in raw.into_iter().enumerate() {
        values[field.exp(j).index()] = v * scale;
    }
    // raw sums over (q^d - 1)^{k-1} unit terms per entry
    let terms = (n as f64).powi(k as i32 - 1);
    let tolerance = tolerance_budget(terms) / normalization(&field, k);
    Ok(KloostermanTable {
        k,
        field,
        convention,
        values,
        tolerance,
    })
}

fn convolve_power_schoolbook(base: &[Complex64], k: usize) -> Vec<Complex64> {
    let n = base.len();
    let mut cur = base.to_vec();
    for _ in 1..k {
        let next: Vec<Complex64> = (0..n)
            .map(|j| {
                let mut acc = ComplexSum::new();
                for i in 0..n {
                    let l = if j >= i { j - i } else { j + n - i };
                    acc.add(cur[i] * base[l]);
                }
                acc.value()
            })
            .collect();
        cur = next;
    }
    cur
}

fn convolve_power_fft(base: &[Complex64], k: usize) -> Vec<Complex64> {
    let n = base.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut spec = base.to_vec();
    fwd.process(&mut spec);
    for z in spec.iter_mut() {
        *z = z.powu(k as u32);
    }
    inv.process(&mut spec);
    let inv_n = 1.0 / n as f64;
    spec.into_iter().map(|z| z * inv_n).collect()
}

/// The pulled-back table `a -> t[c a]`.
pub fn pullback_scale(table: &KloostermanTable, c: ExtElement) -> Result<KloostermanTable> {
    if c.is_zero() {
        return Err(Error::ZeroScale);
    }
    let f = table.field();
    let values = f.elements().map(|a| table.get(f.mul(c, a))).collect();
    Ok(KloostermanTable {
        values,
        ..table.clone()
    })
}

/// `max_a |conj(t[a]) - t[(-1)^k a]|`.
pub fn conjugation_symmetry_check(table: &KloostermanTable) -> f64 {
    let f = table.field();
    f.elements()
        .map(|a| {
            let b = if table.k() % 2 == 0 { a } else { f.neg(a) };
            (table.get(a).conj() - table.get(b)).norm()
        })
        .fold(0.0, f64::max)
}

const CACHE_MAGIC: &[u8; 8] = b"KLTABLE1";

/// Writes the binary cache: header then little-endian `(re, im)` pairs in encoding order.
pub fn write_cache<W: Write>(table: &KloostermanTable, mut w: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Cache(e.to_string());
    let f = table.field();
    w.write_all(CACHE_MAGIC).map_err(io)?;
    w.write_all(&(table.k() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&f.q().to_le_bytes()).map_err(io)?;
    w.write_all(&(f.degree() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&[table.convention().code()]).map_err(io)?;
    for &c in f.modulus() {
        w.write_all(&c.to_le_bytes()).map_err(io)?;
    }
    for v in table.values() {
        w.write_all(&v.re.to_le_bytes()).map_err(io)?;
        w.write_all(&v.im.to_le_bytes()).map_err(io)?;
    }
    Ok(())
}

/// Reads a cache written by [`write_cache`], rebuilding and checking the field.
pub fn read_cache<R: Read>(mut r: R) -> Result<KloostermanTable> {
    let io = |e: std::io::Error| Error::Cache(e.to_string());
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4).map_err(io)?;
    let k = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8).map_err(io)?;
    let q = u64::from_le_bytes(b8);
    r.read_exact(&mut b4).map_err(io)?;
    let d = u32::from_le_bytes(b4) as usize;
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1).map_err(io)?;
    let convention =
        SignConvention::from_code(b1[0]).ok_or_else(|| Error::Cache("bad convention".into()))?;
    let mut modulus = Vec::with_capacity(d + 1);
    for _ in 0..=d {
        r.read_exact(&mut b8).map_err(io)?;
        modulus.push(u64::from_le_bytes(b8));
    }
    let field = Arc::new(build_extension(&make_prime_field(q)?, d)?);
    if field.modulus() != modulus.as_slice() {
        return Err(Error::Cache("modulus does not match the canonical one".into()));
    }
    let mut values = Vec::with_capacity(field.size());
    for _ in 0..field.size() {
        r.read_exact(&mut b8).map_err(io)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8).map_err(io)?;
        values.push(Complex64::new(re, f64::from_le_bytes(b8)));
    }
    let terms = (field.order() as f64).powi(k as i32 - 1);
    let tolerance = tolerance_budget(terms) / normalization(&field, k);
    Ok(KloostermanTable {
        k,
        field,
        convention,
        values,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fq(q: u64, d: usize) -> Arc<ExtField> {
        Arc::new(build_extension(&make_prime_field(q).unwrap(), d).unwrap())
    }

    #[test]
    fn kl2_q5_a1_brute_force() {
        let f = fq(5, 1);
        // sum over x in F_5^x of e((x + 1/x)/5), written out by hand
        let mut raw = Complex64::new(0.0, 0.0);
        for x in 1..5u64 {
            let xinv = (1..5u64).find(|y| x * y % 5 == 1).unwrap();
            let t = (x + xinv) % 5;
            raw += Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / 5.0);
        }
        assert!((raw.re - 0.381_966_011_250_105).abs() < 1e-12);
        let naive = kloosterman_naive(2, ExtElement(1), &f, SignConvention::Intro, 1000).unwrap();
        assert!((naive - raw / 5f64.sqrt()).norm() < 1e-14);
        let table = kloosterman_table(2, f, SignConvention::Intro).unwrap();
        assert!((table.get(ExtElement(1)) - naive).norm() < 1e-12);
    }

    #[test]
    fn zero_argument_vanishes() {
        let f = fq(7, 1);
        for k in 2..5 {
            let z = kloosterman_naive(k, ExtElement::ZERO, &f, SignConvention::Intro, 10_000).unwrap();
            assert_eq!(z, Complex64::new(0.0, 0.0));
            let t = kloosterman_table(k, f.clone(), SignConvention::Intro).unwrap();
            assert_eq!(t.get(ExtElement::ZERO), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn naive_resource_limit() {
        let f = fq(101, 1);
        let err = kloosterman_naive(4, ExtElement(1), &f, SignConvention::Intro, 1000).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }

    #[test]
    fn naive_matches_table_q7() {
        let f = fq(7, 1);
        for k in 2..=4 {
            let t = kloosterman_table(k, f.clone(), SignConvention::Intro).unwrap();
            for a in f.elements() {
                let n = kloosterman_naive(k, a, &f, SignConvention::Intro, NAIVE_DEFAULT_CAP).unwrap();
                assert!((n - t.get(a)).norm() < 1e-8 * k as f64);
            }
        }
    }

    #[test]
    fn schoolbook_and_fft_agree() {
        for (q, d) in [(101, 1), (11, 2), (499, 1)] {
            let f = fq(q, d);
            for k in [2, 3] {
                let a = kloosterman_table_with(k, f.clone(), SignConvention::Intro, ConvolutionPath::Schoolbook)
                    .unwrap();
                let b = kloosterman_table_with(k, f.clone(), SignConvention::Intro, ConvolutionPath::Fft)
                    .unwrap();
                let dev = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                assert!(dev < 1e-10, "q={q} d={d} k={k} dev={dev}");
            }
        }
    }

    #[test]
    fn complete_sum_collapses() {
        for (q, d) in [(7, 1), (53, 1), (3, 2)] {
            for k in 2..=4 {
                for conv in [SignConvention::Intro, SignConvention::Sheaf] {
                    let t = kloosterman_table(k, fq(q, d), conv).unwrap();
                    let s = t.complete_sum();
                    let expect = if k % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((s - Complex64::new(expect, 0.0)).norm() < t.normalization() * 1e-11);
                }
            }
        }
    }

    #[test]
    fn sheaf_convention_flips_even_k() {
        let f = fq(13, 1);
        for k in 2..=5 {
            let a = kloosterman_table(k, f.clone(), SignConvention::Intro).unwrap();
            let b = kloosterman_table(k, f.clone(), SignConvention::Sheaf).unwrap();
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            for x in f.elements() {
                assert!((b.get(x) - a.get(x) * s).norm() < 1e-14);
            }
            let c = a.with_convention(SignConvention::Sheaf);
            assert_eq!(c.values(), b.values());
        }
    }

    #[test]
    fn pullback_examples() {
        let f = fq(7, 1);
        let t = kloosterman_table(2, f.clone(), SignConvention::Intro).unwrap();
        assert_eq!(pullback_scale(&t, ExtElement(1)).unwrap().values(), t.values());
        let p = pullback_scale(&t, ExtElement(3)).unwrap();
        assert_eq!(p.get(ExtElement(1)), t.get(ExtElement(3)));
        let back = pullback_scale(&p, f.inv(ExtElement(3)).unwrap()).unwrap();
        assert_eq!(back.values(), t.values());
        assert_eq!(pullback_scale(&t, ExtElement::ZERO).unwrap_err(), Error::ZeroScale);
    }

    #[test]
    fn conjugation_and_reality() {
        let t = kloosterman_table(3, fq(7, 1), SignConvention::Intro).unwrap();
        assert!(conjugation_symmetry_check(&t) < 1e-9);
        let t = kloosterman_table(2, fq(101, 1), SignConvention::Intro).unwrap();
        assert!(t.values().iter().all(|z| z.im.abs() < 1e-9));
        assert!(conjugation_symmetry_check(&t) < 1e-9);
    }

    #[test]
    fn cache_round_trip() {
        let t = kloosterman_table(3, fq(5, 2), SignConvention::Sheaf).unwrap();
        let mut buf = Vec::new();
        write_cache(&t, &mut buf).unwrap();
        let header = 8 + 4 + 8 + 4 + 1 + 3 * 8;
        assert_eq!(buf.len(), header + 25 * 16);
        let back = read_cache(buf.as_slice()).unwrap();
        assert_eq!(back.k(), 3);
        assert_eq!(back.convention(), SignConvention::Sheaf);
        assert_eq!(back.values(), t.values());
        buf[0] = b'X';
        assert!(read_cache(buf.as_slice()).is_err());
    }
}
