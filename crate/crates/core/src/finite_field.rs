//! Prime fields, their extensions `F_{q^d}`, and additive characters.
//!
//! Elements of `F_{q^d}` are stored as a single integer encoding
//! `c_0 + c_1 q + ... + c_{d-1} q^{d-1}` of the canonical polynomial
//! representative `c_0 + c_1 x + ...` modulo the field's irreducible modulus.
//! Multiplication goes through discrete-log tables built once at construction,
//! so every kernel downstream does table lookups only.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field size `q^d` for which tables are built.
pub const MAX_FIELD_SIZE: u64 = 50_000_000;

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The prime field `F_q` for an odd prime `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    q: u64,
}

/// Validates `q` and returns `F_q`.
pub fn make_prime_field(q: u64) -> Result<PrimeField> {
    if q < 3 {
        return Err(Error::TooSmall(q));
    }
    if !is_prime(q) {
        return Err(Error::CompositeModulus(q));
    }
    Ok(PrimeField { q })
}

impl PrimeField {
    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b % self.q) % self.q
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.q)
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.q)
    }

    /// Inverse of a non-zero residue (Fermat).
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.q;
        (a != 0).then(|| pow_mod(a, self.q - 2, self.q))
    }

    /// Reduces an arbitrary signed integer into `[0, q)`.
    pub fn reduce(&self, n: i64) -> u64 {
        n.rem_euclid(self.q as i64) as u64
    }
}

/// Polynomial helpers over `F_q`; coefficients are stored lowest degree first.
pub mod poly {
    use super::{mul_mod, pow_mod};

    pub fn trim(p: &mut Vec<u64>) {
        while p.len() > 1 && *p.last().unwrap() == 0 {
            p.pop();
        }
        if p.is_empty() {
            p.push(0);
        }
    }

    pub fn is_zero(p: &[u64]) -> bool {
        p.iter().all(|&c| c == 0)
    }

    pub fn degree(p: &[u64]) -> Option<usize> {
        p.iter().rposition(|&c| c != 0)
    }

    /// Remainder of `a` modulo the monic-or-not `m`.
    pub fn rem(a: &[u64], m: &[u64], q: u64) -> Vec<u64> {
        let dm = degree(m).expect("division by zero polynomial");
        let lead_inv = pow_mod(m[dm], q - 2, q);
        let mut r = a.to_vec();
        while let Some(dr) = degree(&r) {
            if dr < dm {
                break;
            }
            let coef = mul_mod(r[dr], lead_inv, q);
            let shift = dr - dm;
            for (i, &mc) in m.iter().enumerate().take(dm + 1) {
                let sub = mul_mod(coef, mc, q);
                r[i + shift] = (r[i + shift] + q - sub) % q;
            }
        }
        trim(&mut r);
        r
    }

    pub fn mul(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(x, y, q)) % q;
            }
        }
        trim(&mut out);
        out
    }

    pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], q: u64) -> Vec<u64> {
        rem(&mul(a, b, q), m, q)
    }

    /// `base^e mod m` with a big exponent given as a `u128`.
    pub fn powmod(base: &[u64], mut e: u128, m: &[u64], q: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, q);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &b, m, q);
            }
            b = mulmod(&b, &b, m, q);
            e >>= 1;
        }
        acc
    }

    pub fn sub(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut out: Vec<u64> = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + q - y) % q
            })
            .collect();
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !is_zero(&y) {
            let r = rem(&x, &y, q);
            x = y;
            y = r;
        }
        x
    }

    /// Rabin's irreducibility test for a monic `f` of degree `d >= 1`.
    pub fn is_irreducible(f: &[u64], q: u64) -> bool {
        let d = match degree(f) {
            Some(d) if d >= 1 => d,
            _ => return false,
        };
        let x = vec![0u64, 1];
        let qd = (q as u128).pow(d as u32);
        let frob = powmod(&x, qd, f, q);
        if !is_zero(&sub(&frob, &rem(&x, f, q), q)) {
            return false;
        }
        for p in super::prime_factors(d as u64) {
            let e = (q as u128).pow((d as u64 / p) as u32);
            let h = sub(&powmod(&x, e, f, q), &x, q);
            let g = gcd(f, &h, q);
            if degree(&g) != Some(0) {
                return false;
            }
        }
        true
    }
}

/// An element of some `F_{q^d}`, stored as its integer encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtElement(pub u32);

impl ExtElement {
    pub const ZERO: ExtElement = ExtElement(0);
    pub const ONE: ExtElement = ExtElement(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// `F_{q^d}` as polynomials modulo a fixed monic irreducible of degree `d`.
#[derive(Debug, Clone)]
pub struct ExtField {
    base: PrimeField,
    d: usize,
    modulus: Vec<u64>,
    size: usize,
    generator: ExtElement,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u32>,
    roots: Vec<Complex64>,
}

/// Builds `F_{q^d}` with the smallest (by encoding) monic irreducible modulus.
pub fn build_extension(f: &PrimeField, d: usize) -> Result<ExtField> {
    ExtField::new(*f, d)
}

impl ExtField {
    pub fn new(base: PrimeField, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::BadDegree);
        }
        let q = base.q();
        let size = (q as u128)
            .checked_pow(d as u32)
            .filter(|&s| s <= MAX_FIELD_SIZE as u128)
            .ok_or_else(|| Error::ResourceLimit(format!("field size {q}^{d} exceeds {MAX_FIELD_SIZE}")))?
            as usize;
        let modulus = smallest_irreducible(q, d);
        let generator = smallest_generator(q, d, &modulus, size as u64 - 1);

        let order = size - 1;
        let mut exp = vec![0u32; order];
        let mut log = vec![u32::MAX; size];
        let g_coeffs = decode(generator.0, q, d);
        let mut cur = vec![1u64];
        for (i, slot) in exp.iter_mut().enumerate() {
            let enc = encode(&cur, q, d);
            *slot = enc;
            log[enc as usize] = i as u32;
            cur = if d == 1 {
                vec![mul_mod(cur[0], g_coeffs[0], q)]
            } else {
                poly::mulmod(&cur, &g_coeffs, &modulus, q)
            };
        }

        // Tr is F_q-linear: tabulate Tr(x^i) for i < d and extend.
        let basis_traces: Vec<u64> = (0..d)
            .map(|i| {
                let mut xi = vec![0u64; i + 1];
                xi[i] = 1;
                trace_by_frobenius(&xi, q, d, &modulus)
            })
            .collect();
        let trace = (0..size as u32)
            .map(|enc| {
                let c = decode(enc, q, d);
                c.iter()
                    .zip(&basis_traces)
                    .fold(0u64, |acc, (&ci, &ti)| (acc + mul_mod(ci, ti, q)) % q) as u32
            })
            .collect();
        let roots = (0..q)
            .map(|t| Complex64::from_polar(1.0, TAU * t as f64 / q as f64))
            .collect();

        Ok(ExtField {
            base,
            d,
            modulus,
            size,
            generator,
            exp,
            log,
            trace,
            roots,
        })
    }

    pub fn base(&self) -> PrimeField {
        self.base
    }

    pub fn q(&self) -> u64 {
        self.base.q()
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// The monic modulus, coefficients lowest degree first (length `d + 1`).
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Number of elements `q^d`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Order of the multiplicative group, `q^d - 1`.
    pub fn order(&self) -> usize {
        self.size - 1
    }

    pub fn elements(&self) -> impl Iterator<Item = ExtElement> + Clone {
        (0..self.size as u32).map(ExtElement)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = ExtElement> + Clone {
        (1..self.size as u32).map(ExtElement)
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> ExtElement {
        let r = if coeffs.len() > self.d {
            poly::rem(coeffs, &self.modulus, self.q())
        } else {
            coeffs.iter().map(|c| c % self.q()).collect()
        };
        ExtElement(encode(&r, self.q(), self.d))
    }

    pub fn coeffs(&self, x: ExtElement) -> Vec<u64> {
        decode(x.0, self.q(), self.d)
    }

    /// Embeds a residue of `F_q` as a constant polynomial.
    #[inline]
    pub fn embed(&self, r: u64) -> ExtElement {
        ExtElement((r % self.q()) as u32)
    }

    /// Embeds a signed integer, reducing mod q.
    pub fn embed_int(&self, n: i64) -> ExtElement {
        self.embed(self.base.reduce(n))
    }

    #[inline]
    pub fn add(&self, a: ExtElement, b: ExtElement) -> ExtElement {
        let q = self.q() as u32;
        if self.d == 1 {
            let s = a.0 + b.0;
            return ExtElement(if s >= q { s - q } else { s });
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        for _ in 0..self.d {
            let s = (x % q + y % q) % q;
            out += s * place;
            x /= q;
            y /= q;
            place = place.wrapping_mul(q);
        }
        ExtElement(out)
    }

    #[inline]
    pub fn neg(&self, a: ExtElement) -> ExtElement {
        let q = self.q() as u32;
        if self.d == 1 {
            return ExtElement(if a.0 == 0 { 0 } else { q - a.0 });
        }
        let (mut x, mut out, mut place) = (a.0, 0u32, 1u32);
        for _ in 0..self.d {
            let c = x % q;
            out += ((q - c) % q) * place;
            x /= q;
            place = place.wrapping_mul(q);
        }
        ExtElement(out)
    }

    #[inline]
    pub fn sub(&self, a: ExtElement, b: ExtElement) -> ExtElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: ExtElement, b: ExtElement) -> ExtElement {
        if a.0 == 0 || b.0 == 0 {
            return ExtElement::ZERO;
        }
        let n = self.order();
        let i = self.log[a.index()] as usize + self.log[b.index()] as usize;
        ExtElement(self.exp[if i >= n { i - n } else { i }])
    }

    /// Multiplication through polynomial arithmetic, bypassing the log tables.
    pub fn mul_poly(&self, a: ExtElement, b: ExtElement) -> ExtElement {
        if self.d == 1 {
            return ExtElement(((a.0 as u64 * b.0 as u64) % self.q()) as u32);
        }
        // encodings fit in u32, so d <= 32
        let (q, d) = (self.q(), self.d);
        let (mut x, mut y) = ([0u64; 32], [0u64; 32]);
        let (mut ea, mut eb) = (a.0 as u64, b.0 as u64);
        for i in 0..d {
            x[i] = ea % q;
            y[i] = eb % q;
            ea /= q;
            eb /= q;
        }
        let mut prod = [0u64; 64];
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                prod[i + j] = (prod[i + j] + x[i] * y[j]) % q;
            }
        }
        // x^t = -sum_{i<d} m_i x^{t-d+i} for t >= d
        for t in (d..2 * d - 1).rev() {
            let top = prod[t];
            if top == 0 {
                continue;
            }
            for i in 0..d {
                prod[t - d + i] = (prod[t - d + i] + (q - top) * self.modulus[i]) % q;
            }
        }
        ExtElement(encode(&prod[..d], q, d))
    }

    pub fn inv(&self, a: ExtElement) -> Option<ExtElement> {
        if a.0 == 0 {
            return None;
        }
        let n = self.order();
        let l = self.log[a.index()] as usize;
        Some(ExtElement(self.exp[(n - l) % n]))
    }

    pub fn div(&self, a: ExtElement, b: ExtElement) -> Option<ExtElement> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: ExtElement, e: u64) -> ExtElement {
        if a.0 == 0 {
            return if e == 0 { ExtElement::ONE } else { ExtElement::ZERO };
        }
        let n = self.order() as u64;
        let l = self.log[a.index()] as u64;
        ExtElement(self.exp[((l as u128 * (e % n) as u128) % n as u128) as usize])
    }

    /// Discrete logarithm to the base of [`Self::mult_generator`].
    #[inline]
    pub fn log(&self, a: ExtElement) -> Option<usize> {
        (a.0 != 0).then(|| self.log[a.index()] as usize)
    }

    #[inline]
    pub fn exp(&self, i: usize) -> ExtElement {
        ExtElement(self.exp[i % self.order()])
    }

    /// Multiplicative order of a non-zero element.
    pub fn element_order(&self, a: ExtElement) -> Option<usize> {
        let l = self.log(a)?;
        let n = self.order();
        Some(n / gcd(l, n))
    }

    /// Smallest-encoding element of multiplicative order `q^d - 1`.
    pub fn mult_generator(&self) -> ExtElement {
        self.generator
    }

    /// Absolute trace `Tr_{F_{q^d}/F_q}(x)` as a residue mod q.
    #[inline]
    pub fn trace(&self, x: ExtElement) -> u64 {
        self.trace[x.index()] as u64
    }

    /// `sum_{i<d} x^{q^i}` computed with polynomial Frobenius powers.
    pub fn trace_frobenius(&self, x: ExtElement) -> u64 {
        trace_by_frobenius(&self.coeffs(x), self.q(), self.d, &self.modulus)
    }

    /// `e(t/q)` for a residue `t`.
    #[inline]
    pub fn unit_root(&self, t: u64) -> Complex64 {
        self.roots[t as usize]
    }

    /// `psi(x) = e(Tr(x)/q)`.
    #[inline]
    pub fn psi1(&self, x: ExtElement) -> Complex64 {
        self.roots[self.trace[x.index()] as usize]
    }

    /// `psi_lambda(x) = psi(lambda x)`.
    #[inline]
    pub fn psi(&self, lambda: ExtElement, x: ExtElement) -> Complex64 {
        self.psi1(self.mul(lambda, x))
    }
}

/// The character `x -> psi(lambda x)` of `F_{q^d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdditiveCharacter {
    pub lambda: ExtElement,
}

impl AdditiveCharacter {
    pub fn new(lambda: ExtElement) -> Self {
        Self { lambda }
    }

    pub fn eval(&self, field: &ExtField, x: ExtElement) -> Complex64 {
        field.psi(self.lambda, x)
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn encode(coeffs: &[u64], q: u64, d: usize) -> u32 {
    let mut enc = 0u64;
    for i in (0..d).rev() {
        enc = enc * q + coeffs.get(i).copied().unwrap_or(0) % q;
    }
    enc as u32
}

fn decode(mut enc: u32, q: u64, d: usize) -> Vec<u64> {
    let q = q as u32;
    (0..d)
        .map(|_| {
            let c = enc % q;
            enc /= q;
            c as u64
        })
        .collect()
}

fn smallest_irreducible(q: u64, d: usize) -> Vec<u64> {
    let count = q.pow(d as u32);
    for enc in 0..count {
        let mut f = decode(enc as u32, q, d);
        f.push(1);
        if poly::is_irreducible(&f, q) {
            return f;
        }
    }
    unreachable!("monic irreducibles of every degree exist over F_q")
}

fn smallest_generator(q: u64, d: usize, modulus: &[u64], order: u64) -> ExtElement {
    let factors = prime_factors(order);
    for enc in 1..=order as u32 {
        let g = decode(enc, q, d);
        let is_gen = factors.iter().all(|&p| {
            let r = if d == 1 {
                vec![pow_mod(g[0], order / p, q)]
            } else {
                poly::powmod(&g, (order / p) as u128, modulus, q)
            };
            r != [1]
        });
        if is_gen {
            return ExtElement(enc);
        }
    }
    unreachable!("F_{{q^d}}^x is cyclic")
}

fn trace_by_frobenius(x: &[u64], q: u64, d: usize, modulus: &[u64]) -> u64 {
    // The conjugate sum lies in F_q, so only constant terms survive.
    let mut acc = 0u64;
    let mut cur = poly::rem(x, modulus, q);
    for _ in 0..d {
        acc = (acc + cur[0]) % q;
        cur = poly::powmod(&cur, q as u128, modulus, q);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u64, d: usize) -> ExtField {
        build_extension(&make_prime_field(q).unwrap(), d).unwrap()
    }

    #[test]
    fn prime_field_validation() {
        assert_eq!(make_prime_field(101).unwrap().q(), 101);
        assert_eq!(make_prime_field(91), Err(Error::CompositeModulus(91)));
        assert_eq!(make_prime_field(2), Err(Error::TooSmall(2)));
        assert_eq!(make_prime_field(1), Err(Error::TooSmall(1)));
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..5000u64 {
            let slow = n >= 2 && (2..n).take_while(|p| p * p <= n).all(|p| n % p != 0);
            assert_eq!(is_prime(n), slow, "n = {n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn degree_one_modulus_is_x() {
        assert_eq!(field(5, 1).modulus(), &[0, 1]);
    }

    #[test]
    fn quadratic_modulus_over_f3() {
        // exhaustive scan over the nine monic quadratics
        let irreducible: Vec<Vec<u64>> = (0..9u64)
            .map(|e| vec![e % 3, e / 3, 1])
            .filter(|f| (0..3u64).all(|x| (f[0] + f[1] * x + x * x) % 3 != 0))
            .collect();
        assert_eq!(irreducible[0], vec![1, 0, 1]);
        assert_eq!(field(3, 2).modulus(), &[1, 0, 1]);
    }

    #[test]
    fn cubic_modulus_over_f7_satisfies_frobenius() {
        let f = field(7, 3);
        let m = f.modulus();
        assert_eq!(m.len(), 4);
        let x = vec![0u64, 1];
        assert_eq!(poly::powmod(&x, 343, m, 7), x);
        // no roots in F_7 means no linear factor
        assert!((0..7u64).all(|r| (m[0] + m[1] * r + m[2] * r * r + r * r * r) % 7 != 0));
    }

    #[test]
    fn generators() {
        assert_eq!(field(7, 1).mult_generator(), ExtElement(3));
        assert_eq!(field(5, 1).mult_generator(), ExtElement(2));
        assert_eq!(field(3, 1).mult_generator(), ExtElement(2));
    }

    #[test]
    fn generator_powers_enumerate_group() {
        for (q, d) in [(3, 1), (101, 1), (3, 2), (5, 3), (11, 2), (7, 4)] {
            let f = field(q, d);
            let mut seen = vec![false; f.size()];
            let g = f.mult_generator();
            let mut cur = ExtElement::ONE;
            for _ in 0..f.order() {
                assert!(!seen[cur.index()]);
                seen[cur.index()] = true;
                cur = f.mul_poly(cur, g);
            }
            assert_eq!(cur, ExtElement::ONE);
            assert!(!seen[0] && seen[1..].iter().all(|&s| s));
        }
    }

    #[test]
    fn table_multiplication_matches_polynomial() {
        for (q, d) in [(3, 2), (5, 2), (7, 3)] {
            let f = field(q, d);
            for a in f.elements() {
                for b in f.elements().step_by(3) {
                    assert_eq!(f.mul(a, b), f.mul_poly(a, b));
                }
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), ExtElement::ONE);
                }
            }
        }
    }

    #[test]
    fn trace_examples() {
        let f = field(5, 1);
        assert_eq!(f.trace(ExtElement(4)), 4);
        let f = field(3, 2);
        assert_eq!(f.trace(ExtElement::ZERO), 0);
        // x = 2 + x: x^3 computed explicitly and added
        let x = f.from_coeffs(&[2, 1]);
        let x3 = f.mul_poly(f.mul_poly(x, x), x);
        let s = f.add(x, x3);
        assert_eq!(f.coeffs(s)[1], 0);
        assert_eq!(f.trace(x), f.coeffs(s)[0]);
        for e in f.elements() {
            assert_eq!(f.trace(e), f.trace_frobenius(e));
        }
    }

    #[test]
    fn trace_fibres_have_equal_size() {
        for (q, d) in [(3, 3), (5, 2), (7, 3), (11, 2), (3, 8)] {
            let f = field(q, d);
            let mut counts = vec![0usize; q as usize];
            for e in f.elements() {
                counts[f.trace(e) as usize] += 1;
            }
            let fibre = f.size() / q as usize;
            assert!(counts.iter().all(|&c| c == fibre), "q={q} d={d}");
        }
    }

    #[test]
    fn psi_examples() {
        let f = field(5, 1);
        for x in f.elements() {
            assert_eq!(f.psi(ExtElement::ZERO, x), Complex64::new(1.0, 0.0));
        }
        let z = f.psi(ExtElement::ONE, ExtElement::ONE);
        assert!((z - Complex64::from_polar(1.0, TAU / 5.0)).norm() < 1e-15);
        let f = field(101, 1);
        let s: Complex64 = f.elements().map(|x| f.psi1(x)).sum();
        assert!(s.norm() < 1e-12);
    }

    #[test]
    fn psi_is_additive() {
        let f = field(5, 2);
        let lam = f.from_coeffs(&[2, 3]);
        let chi = AdditiveCharacter::new(lam);
        for x in f.elements() {
            assert!((chi.eval(&f, x).norm() - 1.0).abs() < 1e-15);
            for y in f.elements().step_by(2) {
                let lhs = chi.eval(&f, f.add(x, y));
                let rhs = chi.eval(&f, x) * chi.eval(&f, y);
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn extension_size_limit() {
        let f = make_prime_field(1009).unwrap();
        assert!(matches!(build_extension(&f, 3), Err(Error::ResourceLimit(_))));
        assert_eq!(build_extension(&f, 0).unwrap_err(), Error::BadDegree);
    }
}
