mod common;

use std::sync::OnceLock;

use common::cat3;
use fqg_core::algebra::{self, CentralElement, CentralKind};
use fqg_core::harmonic::*;
use fqg_core::linalg::{self, c};
use fqg_core::spectral::threshold;
use fqg_core::{BlockElement, Category};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shared() -> &'static Category {
    static CAT: OnceLock<Category> = OnceLock::new();
    CAT.get_or_init(|| cat3(6))
}

fn closed(kind: CentralKind) -> CentralElement {
    CentralElement::new(kind, 3, WEAK_LP_N_MAX)
}

#[test]
fn schatten_trivial_cases() {
    for q in [1.0, 1.5, 2.0] {
        let r = schatten_contraction_trial((2, 1, 3), q, 20, 1).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }
    // x = a ⊗ e_11, y = e_11 ⊗ b
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (a, b) = (linalg::random_gaussian(&mut rng, 2, 2), linalg::random_gaussian(&mut rng, 3, 3));
    let mut e = linalg::zeros(2, 2);
    e[(0, 0)] = c(1.0);
    let x = linalg::kron(&a, &e);
    let y = linalg::kron(&e, &b);
    for q in [1.0, 1.25, 2.0] {
        assert!((contraction_ratio(&x, &y, (2, 2, 3), q).unwrap() - 1.0).abs() < 1e-12);
    }
    assert!(schatten_contraction_trial((2, 2, 2), 2.5, 1, 0).is_err());
}

#[test]
fn schatten_property_trial() {
    let r = schatten_contraction_trial((2, 3, 2), 1.5, 500, 11).unwrap();
    assert!(r <= 1.0 + 1e-10, "{r}");
}

#[test]
fn local_scan_small() {
    let cat = shared();
    let rep = local_rd_scan(2.0, 2, 2, 3, cat).unwrap();
    assert!(rep.empirical_local_constant.is_finite() && rep.empirical_local_constant >= 1.0 - 1e-12);
    let best = rep.cells.iter().map(|c| c.ratio).fold(0.0, f64::max);
    assert!((best - rep.empirical_local_constant).abs() < 1e-15);
    for cell in rep.cells.iter().filter(|c| c.n == 0) {
        assert!((cell.ratio - 1.0).abs() < 1e-9, "{cell:?}");
    }
    assert!(local_rd_scan(2.5, 1, 1, 0, cat).is_err());
}

#[test]
fn global_estimates() {
    let cat = shared();
    let g0 = global_rd_estimate(0, 2.0, 3, 2, 1, cat).unwrap();
    assert!((g0.ratio - 1.0).abs() < 1e-9);
    let a = global_rd_estimate(1, 2.0, 2, 1, 4, cat).unwrap();
    let b = global_rd_estimate(1, 2.0, 4, 1, 4, cat).unwrap();
    assert!(b.ratio >= a.ratio - 1e-9, "{} {}", a.ratio, b.ratio);
    assert_eq!(a.bound, "lower");
    assert!(global_rd_estimate(3, 2.0, 5, 1, 0, cat).is_err());
}

#[test]
fn cstar_bounds() {
    let cat = shared();
    assert!((cstar_upper_bound(&BlockElement::unit(), 2.0, 1.7, cat).unwrap() - 1.7).abs() < 1e-14);
    let x = BlockElement::random(&mut ChaCha8Rng::seed_from_u64(2), &[2], cat);
    let want = 1.7 * 3f64.powf(1.5) * algebra::lq_norm(&x, 2.0, cat).unwrap();
    assert!((cstar_upper_bound(&x, 2.0, 1.7, cat).unwrap() - want).abs() < 1e-12 * want);
    assert!(cstar_upper_bound(&BlockElement::zero(), 2.0, 1.0, cat).is_err());
    // upper bound vs truncated-regular-representation lower bound
    let d = local_rd_scan(2.0, 2, 2, 1, cat).unwrap().empirical_local_constant;
    for seed in 0..3 {
        let x = BlockElement::random(&mut ChaCha8Rng::seed_from_u64(seed), &[0, 1], cat);
        let lower = algebra::truncated_regular_rep(&x, 4, cat).unwrap().certified_lower_bound().unwrap();
        assert!(lower <= cstar_upper_bound(&x, 2.0, d, cat).unwrap() * (1.0 + 1e-9));
    }
    let seq = cstar_power_sequence(&BlockElement::unit(), 2.0, 3, 6, cat).unwrap();
    assert!(seq.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn weak_lp_examples() {
    assert_eq!(weak_lp_classify(&closed(CentralKind::Semigroup { r: 0.30 }), 2.0, 3).unwrap().verdict, Verdict::WeaklyLp);
    assert_eq!(weak_lp_classify(&closed(CentralKind::Semigroup { r: 0.50 }), 2.0, 3).unwrap().verdict, Verdict::NotWeaklyLp);
    let phi = closed(CentralKind::PoissonLike { r: 0.60 });
    assert_eq!(weak_lp_classify(&phi, 5.0, 3).unwrap().verdict, Verdict::WeaklyLp);
    // φ_0.6 decays like 1/ρ(3) ≈ 0.382 < ρ^{-2/3}, so it is weakly L_3 as well
    let v3 = weak_lp_classify(&phi, 3.0, 3).unwrap();
    assert_eq!(v3.verdict, Verdict::WeaklyLp);
    assert!(v3.items_agree);
}

#[test]
fn exotic_window_examples() {
    let w = exotic_window_demo(3.0, 5.0, 3).unwrap();
    assert!((w.r0 - 0.603).abs() < 1e-3, "{}", w.r0);
    assert!((w.window.0 - threshold(3.0, 3).unwrap()).abs() < 1e-15);
    assert!(w.split && w.weakly_lp_prime && !w.weakly_lp);
    let w = exotic_window_demo(2.0, 4.0, 3).unwrap();
    assert!((w.r0 - 0.5).abs() < 1e-3 && w.split);
    assert!(exotic_window_demo(3.0, 3.0, 3).is_err());
}

#[test]
fn gram_tests() {
    let cat = shared();
    let phi = CentralElement::new(CentralKind::PoissonLike { r: 0.7 }, 3, 4).to_block(cat, 4);
    let one = pd_gram_test(&phi, &[BlockElement::unit()], cat).unwrap();
    assert!(one.pass && (one.norm - 1.0).abs() < 1e-14);
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam: Vec<BlockElement> = (0..5).map(|_| BlockElement::random(&mut rng, &[0, 1, 2], cat)).collect();
        let rep = pd_gram_test(&phi, &fam, cat).unwrap();
        assert!(rep.pass, "{rep:?}");
        // coefficient of the regular representation at ξ = η
        let y = BlockElement::random(&mut rng, &[0, 1], cat);
        let coeff = algebra::regular_coefficient(&y.adjoint(), &y.adjoint(), cat).unwrap();
        let rep = pd_gram_test(&coeff, &fam[..3], cat).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn schatten_contraction(dh in 1usize..=4, d in 1usize..=4, dk in 1usize..=4, qi in 0usize..4, seed in any::<u64>()) {
        let q = [1.0, 1.25, 1.5, 2.0][qi];
        prop_assert!(schatten_contraction_trial((dh, d, dk), q, 8, seed).unwrap() <= 1.0 + 1e-10);
    }

    #[test]
    fn characterization_items_agree(r in 0.05f64..0.95, p in 2.0f64..8.0, poisson in any::<bool>()) {
        let kind = if poisson { CentralKind::PoissonLike { r } } else { CentralKind::Semigroup { r } };
        let th = threshold(p, 3).unwrap();
        let rate = decay_rate(kind, 3).unwrap();
        prop_assume!((rate - th).abs() > 0.01);
        let v = weak_lp_classify(&closed(kind), p, 3).unwrap();
        prop_assert!(v.items_agree, "{v:?}");
        let want = if rate < th { Verdict::WeaklyLp } else { Verdict::NotWeaklyLp };
        prop_assert_eq!(v.verdict, want);
    }

    #[test]
    fn exotic_windows_only_split_one_way(p in 2.0f64..6.0, dp in 0.5f64..6.0) {
        let w = exotic_window_demo(p, p + dp, 3).unwrap();
        prop_assert!(w.split, "{:?}", (w.weakly_lp_prime, w.weakly_lp));
    }

    #[test]
    fn duality_map_norms(seed in any::<u64>(), q in 1.1f64..3.0) {
        let z = linalg::random_gaussian(&mut ChaCha8Rng::seed_from_u64(seed), 4, 3);
        let j = duality_map(&z, q).unwrap();
        // J_q(z) attains Hölder equality: ⟨J, z⟩ = ‖J‖_{q'} ‖z‖_q
        let nz = linalg::schatten(&z, q).unwrap();
        let nj = linalg::schatten(&j, conjugate_exponent(q)).unwrap();
        let pair = linalg::trace_prod(&linalg::adjoint(&j), &z);
        prop_assert!((pair.re - nj * nz).abs() <= 1e-9 * nj * nz && pair.im.abs() <= 1e-9 * nj * nz);
    }
}
