mod common;

use std::sync::OnceLock;

use common::{cat3, sym4};
use fqg_core::algebra::*;
use fqg_core::harmonic::conjugate_exponent;
use fqg_core::linalg::{self, c};
use fqg_core::{BlockElement, Category};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shared() -> &'static Category {
    static CAT: OnceLock<Category> = OnceLock::new();
    CAT.get_or_init(|| cat3(6))
}

fn symp() -> &'static Category {
    static CAT: OnceLock<Category> = OnceLock::new();
    CAT.get_or_init(|| sym4(4))
}

fn levels() -> impl Strategy<Value = Vec<usize>> {
    proptest::sample::subsequence(vec![0usize, 1, 2], 1..=2)
}

fn draw(seed: u64, lv: &[usize], cat: &Category) -> BlockElement {
    BlockElement::random(&mut ChaCha8Rng::seed_from_u64(seed), lv, cat)
}

fn l1(x: &BlockElement, cat: &Category) -> f64 {
    lq_norm(x, 1.0, cat).unwrap()
}

#[test]
fn haar_examples() {
    let cat = shared();
    assert!((haar(&BlockElement::unit(), cat) - c(1.0)).norm() < 1e-15);
    assert!((haar(&BlockElement::p(2, cat), cat) - c(64.0)).norm() < 1e-12);
    let traceless = BlockElement::matrix_unit(2, 0, 1, cat).add(&BlockElement::matrix_unit(1, 2, 0, cat));
    assert!(haar(&traceless, cat).norm() < 1e-15);
}

#[test]
fn lq_norm_examples() {
    let cat = shared();
    for n in 0..=4 {
        let d = cat.dim(n) as f64;
        for q in [1.0, 1.5, 2.0, 3.0] {
            let v = lq_norm(&BlockElement::p(n, cat), q, cat).unwrap();
            assert!((v - d.powf(2.0 / q)).abs() < 1e-10 * v, "n={n} q={q}");
        }
    }
    let r = 0.4;
    let sg = CentralElement::new(CentralKind::Semigroup { r }, 3, 4).to_block(cat, 4);
    let want: f64 = (0..=4).map(|n| r.powf(2.0 * n as f64) * (cat.dim(n) as f64).powi(2)).sum::<f64>().sqrt();
    assert!((lq_norm(&sg, 2.0, cat).unwrap() - want).abs() < 1e-12 * want);
    assert!(lq_norm(&sg, 0.5, cat).is_err());
}

#[test]
fn convolution_examples() {
    let cat = shared();
    let e = BlockElement::matrix_unit(1, 0, 0, cat);
    let z = convolve(&e, &e, cat).unwrap();
    // (d_1 d_1 / d_0) |t_{00}|^2 = 9 / 3
    assert!((z.block(0).unwrap()[(0, 0)] - c(3.0)).norm() < 1e-13);
    assert!(z.levels().iter().all(|l| [0, 2].contains(l)));
    let pp = convolve(&BlockElement::p(1, cat), &BlockElement::p(1, cat), cat).unwrap();
    for l in [0, 2] {
        let coef = 9.0 / cat.dim(l) as f64;
        let want = linalg::scale(&linalg::eye(cat.dim(l)), c(coef));
        assert!(linalg::max_abs(&linalg::sub(pp.block(l).unwrap(), &want)) < 1e-12, "l={l}");
    }
    let big = BlockElement::p(4, cat);
    assert!(convolve(&big, &big, cat).is_err());
}

#[test]
fn antipode_examples() {
    let cat = shared();
    let x = draw(3, &[1], cat);
    let s = antipode(&x, cat).unwrap();
    assert!(linalg::max_abs(&linalg::sub(s.block(1).unwrap(), &linalg::transpose(x.block(1).unwrap()))) < 1e-14);
    for n in 0..=3 {
        let p = BlockElement::p(n, cat);
        assert!(antipode(&p, cat).unwrap().sub(&p).is_zero() || lq_norm(&antipode(&p, cat).unwrap().sub(&p), 2.0, cat).unwrap() < 1e-12);
        assert!(lq_norm(&sharp(&p, cat).unwrap().sub(&p), 2.0, cat).unwrap() < 1e-12);
    }
}

#[test]
fn central_family_examples() {
    let phi = CentralElement::new(CentralKind::PoissonLike { r: 0.7 }, 3, 10);
    assert!((phi.profile[0] - 1.0).abs() < 1e-15);
    assert!((phi.profile[1] - 0.7).abs() < 1e-14);
    let band = poisson_band(0.9, 3, 40);
    assert!(band.c1 > 0.0 && band.c2.is_finite() && band.c1 <= band.c2);
    let lw = CentralElement::new(CentralKind::LengthWeight { p: 2.0 }, 3, 3);
    assert!((lw.profile[3] - 4f64.powf(-2.0)).abs() < 1e-15);
}

#[test]
fn regular_coefficient_recovers_y() {
    let cat = shared();
    for seed in 0..4 {
        let y = draw(seed, &[0, 1, 2, 3], cat);
        let got = regular_coefficient(&BlockElement::unit(), &y.adjoint(), cat).unwrap();
        assert!(lq_norm(&got.sub(&y), 2.0, cat).unwrap() <= 1e-10 * lq_norm(&y, 2.0, cat).unwrap());
    }
    let u = regular_coefficient(&BlockElement::unit(), &BlockElement::unit(), cat).unwrap();
    assert!(lq_norm(&u.sub(&BlockElement::unit()), 2.0, cat).unwrap() < 1e-14);
    let a = draw(9, &[2], cat);
    let b = draw(10, &[2], cat);
    let r = regular_coefficient(&a, &b, cat).unwrap();
    assert!(r.levels().iter().all(|&l| l <= 4));
}

#[test]
fn regular_rep_examples() {
    let cat = shared();
    let id = truncated_regular_rep(&BlockElement::unit(), 3, cat).unwrap();
    assert!(linalg::max_abs(&linalg::sub(&id.matrix, &linalg::eye(id.matrix.nrows()))) < 1e-13);
    let mut prev = 0.0;
    for k in 1..=4 {
        let v = truncated_regular_rep(&BlockElement::p(1, cat), k, cat).unwrap().certified_lower_bound().unwrap();
        assert!(v >= prev - 1e-10, "K={k}");
        prev = v;
    }
    assert!(truncated_regular_rep(&BlockElement::p(2, cat), 5, cat).is_err());
}

// λ(x♯) = λ(x)^* on the columns whose images are not cut by the truncation.
#[test]
fn regular_rep_adjoint_compatibility() {
    let cat = shared();
    for seed in 0..3 {
        let x = draw(seed, &[0, 1, 2], cat);
        let k = 4;
        let a = truncated_regular_rep(&x, k, cat).unwrap();
        let b = truncated_regular_rep(&sharp(&x, cat).unwrap(), k, cat).unwrap();
        let w = a.window(k - 2);
        let (ma, mb) = (a.matrix.get(..w, ..w).to_owned(), b.matrix.get(..w, ..w).to_owned());
        let d = linalg::max_abs(&linalg::sub(&mb, &linalg::adjoint(&ma)));
        assert!(d <= 1e-8 * linalg::max_abs(&ma), "seed {seed}: {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_equivalence(s in any::<u64>(), lx in levels(), ly in levels(), la in proptest::sample::subsequence(vec![0usize, 1, 2, 3, 4], 1..=3)) {
        let cat = shared();
        let (x, y, a) = (draw(s, &lx, cat), draw(s ^ 1, &ly, cat), draw(s ^ 2, &la, cat));
        let direct = haar(&a.mul(&convolve(&x, &y, cat).unwrap()), cat);
        let oracle = convolve_oracle_pairing(&x, &y, &a, cat).unwrap();
        let scale = l1(&x, cat) * l1(&y, cat) * lq_norm(&a, f64::INFINITY, cat).unwrap();
        prop_assert!((direct - oracle).norm() <= 1e-8 * scale, "{direct} vs {oracle}");
    }

    #[test]
    fn unit_law(s in any::<u64>(), lx in proptest::sample::subsequence(vec![0usize, 1, 2, 3], 1..=3)) {
        let cat = shared();
        let x = draw(s, &lx, cat);
        let u = BlockElement::unit();
        let n = lq_norm(&x, 2.0, cat).unwrap();
        prop_assert!(lq_norm(&convolve(&u, &x, cat).unwrap().sub(&x), 2.0, cat).unwrap() <= 1e-12 * n);
        prop_assert!(lq_norm(&convolve(&x, &u, cat).unwrap().sub(&x), 2.0, cat).unwrap() <= 1e-12 * n);
    }

    #[test]
    fn associativity(s in any::<u64>(), lx in levels(), ly in levels(), lz in levels()) {
        let cat = shared();
        let (x, y, z) = (draw(s, &lx, cat), draw(s ^ 1, &ly, cat), draw(s ^ 2, &lz, cat));
        let left = convolve(&convolve(&x, &y, cat).unwrap(), &z, cat).unwrap();
        let right = convolve(&x, &convolve(&y, &z, cat).unwrap(), cat).unwrap();
        prop_assert!(l1(&left.sub(&right), cat) <= 1e-8 * l1(&x, cat) * l1(&y, cat) * l1(&z, cat));
    }

    #[test]
    fn sharp_is_an_anti_homomorphism(s in any::<u64>(), lx in levels(), ly in levels(), symplectic in any::<bool>()) {
        let cat = if symplectic { symp() } else { shared() };
        let (x, y) = (draw(s, &lx, cat), draw(s ^ 1, &ly, cat));
        let lhs = sharp(&convolve(&x, &y, cat).unwrap(), cat).unwrap();
        let rhs = convolve(&sharp(&y, cat).unwrap(), &sharp(&x, cat).unwrap(), cat).unwrap();
        prop_assert!(l1(&lhs.sub(&rhs), cat) <= 1e-8 * l1(&x, cat) * l1(&y, cat));
    }

    #[test]
    fn involutions(s in any::<u64>(), lx in proptest::sample::subsequence(vec![0usize, 1, 2, 3], 1..=3), symplectic in any::<bool>()) {
        let cat = if symplectic { symp() } else { shared() };
        let x = draw(s, &lx, cat);
        let n2 = lq_norm(&x, 2.0, cat).unwrap();
        let ss = antipode(&antipode(&x, cat).unwrap(), cat).unwrap();
        prop_assert!(lq_norm(&ss.sub(&x), 2.0, cat).unwrap() <= 1e-10 * n2);
        let sh = sharp(&sharp(&x, cat).unwrap(), cat).unwrap();
        prop_assert!(lq_norm(&sh.sub(&x), 2.0, cat).unwrap() <= 1e-10 * n2);
        for q in [1.0, 1.5, 2.0] {
            let a = lq_norm(&antipode(&x.adjoint(), cat).unwrap(), q, cat).unwrap();
            let b = lq_norm(&x, q, cat).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn haar_is_tracial_for_convolution(s in any::<u64>(), lx in levels(), ly in levels()) {
        let cat = shared();
        let (x, y) = (draw(s, &lx, cat), draw(s ^ 1, &ly, cat));
        let a = haar(&convolve(&x, &y, cat).unwrap(), cat);
        let b = haar(&convolve(&y, &x, cat).unwrap(), cat);
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(b.norm()).max(1e-12));
    }

    #[test]
    fn holder(s in any::<u64>(), lx in levels(), ly in levels(), q in 1.0f64..4.0) {
        let cat = shared();
        let (x, y) = (draw(s, &lx, cat), draw(s ^ 1, &ly, cat));
        let p = conjugate_exponent(q);
        let lhs = haar(&x.mul(&y), cat).norm();
        prop_assert!(lhs <= lq_norm(&x, q, cat).unwrap() * lq_norm(&y, p, cat).unwrap() * (1.0 + 1e-12));
    }

    // Every element has block weights d_n ≥ 1, so the unit ball of L_p1 sits inside that of L_p2.
    #[test]
    fn lp_nesting(s in any::<u64>(), lx in levels(), p1 in 1.0f64..3.0, dp in 0.0f64..3.0) {
        let cat = shared();
        let x = draw(s, &lx, cat);
        let x = x.scale(c(1.0 / lq_norm(&x, p1, cat).unwrap()));
        prop_assert!(lq_norm(&x, p1 + dp, cat).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn convolution_support(s in any::<u64>(), n in 0usize..=3, k in 0usize..=3) {
        let cat = shared();
        let z = convolve(&draw(s, &[n], cat), &draw(s ^ 1, &[k], cat), cat).unwrap();
        prop_assert!(z.levels().iter().all(|&l| fqg_core::spectral::in_fusion(n, k, l)));
    }
}
