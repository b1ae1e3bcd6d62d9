use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use klab::bilinear::{bilinear_form, shift_identity_check, trivial_bound, BilinearInstance};
use klab::divisor_app::{delta_from_eta, eta_from_delta, progression_scan, tau_table, CuspFormCoeffs};
use klab::kloosterman::{conjugation_symmetry_check, pullback_scale};
use klab::monodromy::{compute_sk, find_embedding_degree, kth_roots};
use klab::sum_product::{big_k, big_r, classify_tuple, r_linear_sum, SumProductContext, TupleClass};
use klab::{build_extension, kloosterman_table, make_prime_field, Complex64, ExtElement, ExtField, SignConvention};

const FIELDS: [(u64, usize); 6] = [(3, 2), (5, 2), (7, 1), (3, 3), (13, 1), (31, 1)];

fn fields() -> &'static Vec<Arc<ExtField>> {
    static F: OnceLock<Vec<Arc<ExtField>>> = OnceLock::new();
    F.get_or_init(|| {
        FIELDS
            .iter()
            .map(|&(q, d)| Arc::new(build_extension(&make_prime_field(q).unwrap(), d).unwrap()))
            .collect()
    })
}

fn ctx(k: usize) -> &'static SumProductContext {
    static C: OnceLock<Vec<SumProductContext>> = OnceLock::new();
    let all = C.get_or_init(|| {
        (2..=3)
            .map(|k| {
                let f = Arc::new(build_extension(&make_prime_field(23).unwrap(), 1).unwrap());
                SumProductContext::untwisted(kloosterman_table(k, f, SignConvention::Intro).unwrap())
            })
            .collect()
    });
    &all[k - 2]
}

fn coeffs() -> &'static CuspFormCoeffs {
    static T: OnceLock<CuspFormCoeffs> = OnceLock::new();
    T.get_or_init(|| tau_table(3000).unwrap())
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_arithmetic(i in 0usize..6, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = &fields()[i];
        let n = f.size() as u32;
        let (a, b, c) = (ExtElement(a % n), ExtElement(b % n), ExtElement(c % n));
        prop_assert_eq!(f.mul(a, b), f.mul_poly(a, b));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(f.sub(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), ExtElement::ONE);
        }
        prop_assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % f.q());
        prop_assert_eq!(f.trace(a), f.trace_frobenius(a));
    }

    #[test]
    fn character_is_additive(i in 0usize..6, l in any::<u32>(), x in any::<u32>(), y in any::<u32>()) {
        let f = &fields()[i];
        let n = f.size() as u32;
        let (l, x, y) = (ExtElement(l % n), ExtElement(x % n), ExtElement(y % n));
        let lhs = f.psi(l, f.add(x, y));
        prop_assert!((lhs.norm() - 1.0).abs() < 1e-12);
        prop_assert!((lhs - f.psi(l, x) * f.psi(l, y)).norm() < 1e-12);
        prop_assert!((f.psi(l, x) - f.psi1(f.mul(l, x))).norm() < 1e-12);
    }

    #[test]
    fn table_invariants(i in 0usize..6, k in 2usize..=4, c in any::<u32>()) {
        let f = fields()[i].clone();
        let t = kloosterman_table(k, f.clone(), SignConvention::Intro).unwrap();
        prop_assert!(t.max_abs() <= k as f64 + 1e-9);
        prop_assert_eq!(t.get(ExtElement::ZERO), Complex64::new(0.0, 0.0));
        prop_assert!(conjugation_symmetry_check(&t) <= 1e-9);
        let sheaf = t.with_convention(SignConvention::Sheaf);
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        for a in f.elements() {
            prop_assert!((sheaf.get(a) - t.get(a) * sign).norm() < 1e-12);
        }
        let c = ExtElement(1 + c % (f.size() as u32 - 1));
        let back = pullback_scale(&pullback_scale(&t, c).unwrap(), f.inv(c).unwrap()).unwrap();
        for (x, y) in back.values().iter().zip(t.values()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn classification_symmetries(b in prop::array::uniform4(0u32..4), k in 2usize..=3) {
        let b = b.map(ExtElement);
        let class = classify_tuple(&b, k);
        // both rules are unchanged by swapping inside and between the pairs
        for p in [[1, 0, 2, 3], [0, 1, 3, 2], [2, 3, 0, 1]] {
            prop_assert_eq!(classify_tuple(&p.map(|j| b[j]), k), class);
        }
        if k % 2 == 0 {
            prop_assert_eq!(classify_tuple(&[b[0], b[2], b[1], b[3]], k), class);
        }
        let mut sorted = b;
        sorted.sort();
        let distinct = sorted.windows(2).all(|w| w[0] != w[1]);
        if distinct {
            prop_assert_eq!(class, TupleClass::Generic);
        }
    }

    #[test]
    fn k_product_bound_and_fubini(k in 2usize..=3, b in prop::array::uniform4(0u32..23), l in 0u32..23, r in 0u32..23) {
        let c = ctx(k);
        let f = c.field();
        let b = b.map(ExtElement);
        let (l, r) = (ExtElement(l), ExtElement(r));
        for s in f.elements() {
            prop_assert!(big_k(c, r, s, l, &b).norm() <= (k as f64).powi(4) + 1e-9);
        }
        let direct: Complex64 = f.elements().flat_map(|r| f.elements().map(move |s| (r, s)))
            .map(|(r, s)| big_k(c, r, s, l, &b)).sum();
        prop_assert!(close(r_linear_sum(c, l, &b), direct, 1e-10));
    }

    #[test]
    fn twist_covariance(k in 2usize..=3, b in prop::array::uniform4(0u32..23), l in 0u32..23, r in 0u32..23, cc in 1u32..23) {
        let base = ctx(k);
        let f = base.field();
        let cc = ExtElement(cc);
        let twisted = SumProductContext::new(base.table().clone(), cc).unwrap();
        let b = b.map(ExtElement);
        let (l, r) = (ExtElement(l), ExtElement(r));
        let lhs = big_r(&twisted, r, l, &b);
        let rhs = big_r(base, r, f.div(l, cc).unwrap(), &b);
        prop_assert!(close(lhs, rhs, 1e-9));
    }

    #[test]
    fn shift_identity_holds(seed in any::<u64>(), a in 1u64..=3, bb in 1u64..=3) {
        use rand::SeedableRng;
        let c = ctx(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let alpha = klab::bilinear::Ensemble::Steinhaus.sample(3, &mut rng);
        let dev = shift_identity_check(c, &alpha, 1, 9, a, bb).unwrap();
        prop_assert!(dev < 1e-9);
    }

    #[test]
    fn bilinear_within_trivial(seed in any::<u64>(), m in 1usize..8, n in 1usize..12, offset in 1u64..10) {
        use rand::SeedableRng;
        let c = ctx(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let alpha = klab::bilinear::Ensemble::Steinhaus.sample(m, &mut rng);
        let beta = klab::bilinear::Ensemble::Rademacher.sample(n, &mut rng);
        let inst = BilinearInstance::new(23, offset, alpha, beta).unwrap();
        // |Kl_2| <= 2 and Cauchy-Schwarz
        prop_assert!(bilinear_form(c, &inst).unwrap().norm() <= 2.0 * trivial_bound(&inst) * (1.0 + 1e-12));
    }

    #[test]
    fn delta_eta_round_trip(eta in 0.0f64..0.2) {
        prop_assert!((eta_from_delta(delta_from_eta(eta)) - eta).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sk_counts(k in 2usize..=6, qi in 0usize..4) {
        let q = [7u64, 11, 13, 29][qi];
        prop_assume!(q as usize % k != 0);
        let d = find_embedding_degree(k as u64, q).unwrap();
        prop_assume!((q as f64).powi(d as i32) <= 1e5);
        let host = build_extension(&make_prime_field(q).unwrap(), d).unwrap();
        let sk = compute_sk(k, &host).unwrap();
        prop_assert_eq!(sk.total() + sk.zero_count, k * k * k);
        let roots = kth_roots(k, &host).unwrap();
        // each entry is a k-th power, so it lies in mu_{(q^d-1)/k}
        let sub = (host.order() / k) as u64;
        for e in sk.entries.keys() {
            prop_assert_eq!(host.pow(*e, sub), ExtElement::ONE);
        }
        prop_assert_eq!(roots.len(), k);
    }

    #[test]
    fn progression_discrepancies_cancel(x in 50usize..3000, qi in 0usize..5) {
        let q = [5u64, 7, 11, 53, 101][qi];
        let scan = progression_scan(coeffs(), x, q).unwrap();
        let total: BigInt = scan.reports.iter().map(|r| &r.e_tau_scaled).sum();
        prop_assert!(total.is_zero());
        prop_assert_eq!(scan.reports.len() as u64, q - 1);
    }

    #[test]
    fn hecke_multiplicativity(m in 1usize..55, n in 1usize..55) {
        use num_integer::Integer;
        prop_assume!(m.gcd(&n) == 1);
        let t = coeffs();
        prop_assert_eq!(t.tau(m * n).unwrap(), &(t.tau(m).unwrap() * t.tau(n).unwrap()));
    }
}
