mod common;

use std::sync::OnceLock;

use common::{cat3, swap_rows, sym4};
use fqg_core::cache::Cache;
use fqg_core::linalg::{self, c, CMat};
use fqg_core::spectral::{fusion_range, in_fusion};
use fqg_core::{Category, QGParams};
use proptest::prelude::*;

fn shared() -> &'static Category {
    static CAT: OnceLock<Category> = OnceLock::new();
    CAT.get_or_init(|| cat3(6))
}

fn overlap(a: &CMat, b: &CMat) -> f64 {
    linalg::trace_prod(&linalg::adjoint(a), b).norm()
}

#[test]
fn zigzag_values() {
    let z = cat3(2).zigzag();
    assert!(linalg::max_abs(&linalg::sub(&z, &linalg::scale(&linalg::eye(3), c(1.0 / 3.0)))) < 1e-12);
    let z = sym4(2).zigzag();
    assert!(linalg::max_abs(&linalg::sub(&z, &linalg::scale(&linalg::eye(4), c(-0.25)))) < 1e-12);
    let t = cat3(1).invariant_vector().clone();
    assert!((linalg::frob(&t) - 1.0).abs() < 1e-12);
    let s = 1.0 / 3f64.sqrt();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { s } else { 0.0 };
            assert!((t[(i * 3 + j, 0)] - c(want)).norm() < 1e-15);
        }
    }
}

#[test]
fn non_unitary_f_is_rejected() {
    let f = linalg::scale(&linalg::eye(3), c(2.0));
    assert!(QGParams::new(f).is_err());
}

#[test]
fn jones_wenzl_suite() {
    let runs: Vec<(Category, usize)> = vec![
        (cat3(7), 7),
        (sym4(5), 5),
        (Category::new(QGParams::identity(5).unwrap(), 4), 4),
        (Category::new(QGParams::phase_twisted(3).unwrap(), 4), 4),
    ];
    for (cat, top) in &runs {
        for n in 0..=*top {
            let r = cat.validate_jw(n).unwrap();
            assert!(r.pass, "N={} n={n}: {r:?}", cat.big_n());
        }
    }
}

#[test]
fn jones_wenzl_examples() {
    let cat = shared();
    let p1 = cat.jw_projection(1).unwrap();
    assert!(linalg::max_abs(&linalg::sub(&p1, &linalg::eye(3))) < 1e-15);
    let t = cat.invariant_vector();
    let want = linalg::sub(&linalg::eye(9), &linalg::mm(t, t.adjoint()));
    assert!(linalg::max_abs(&linalg::sub(&cat.jw_projection(2).unwrap(), &want)) < 1e-12);
    assert_eq!(cat.validate_jw(4).unwrap().rank, 55);
}

#[test]
fn bottom_and_top_components() {
    let cat = shared();
    let v = cat.fusion_isometry(1, 1, 0).unwrap();
    assert!(linalg::max_abs(&linalg::sub(&v, cat.invariant_vector())) < 1e-12);
    for (n, k) in [(1, 2), (2, 2), (3, 1)] {
        let (bn, bk, bl) = (cat.basis(n).unwrap(), cat.basis(k).unwrap(), cat.basis(n + k).unwrap());
        let top = linalg::mm(linalg::kron(&bn, &bk).adjoint(), &*bl);
        let v = cat.fusion_isometry(n, k, n + k).unwrap();
        assert!((overlap(&v, &top) - cat.dim(n + k) as f64).abs() < 1e-9, "({n},{k})");
    }
    assert!(cat.fusion_isometry(1, 1, 1).is_err());
}

#[test]
fn completeness_n3() {
    let cat = shared();
    for n in 0..=3 {
        for k in 0..=3 {
            assert!(cat.completeness_defect(n, k).unwrap() <= 1e-8, "({n},{k})");
        }
    }
}

#[test]
fn completeness_symplectic() {
    let cat = sym4(4);
    for n in 0..=2 {
        for k in 0..=2 {
            assert!(cat.completeness_defect(n, k).unwrap() <= 1e-8, "({n},{k})");
        }
    }
}

#[test]
fn conjugation_maps() {
    for cat in [cat3(4), sym4(3)] {
        let eps = cat.params().epsilon() as f64;
        let j1 = cat.conjugation(1).unwrap();
        assert!(linalg::max_abs(&linalg::sub(&j1, cat.params().f())) < 1e-12);
        for n in 0..=3 {
            let j = cat.conjugation(n).unwrap();
            let d = cat.dim(n);
            assert!(linalg::isometry_defect(&j) < 1e-9);
            let jj = linalg::mm(&*j, &linalg::conj(&j));
            let want = linalg::scale(&linalg::eye(d), c(eps.powi(n as i32)));
            assert!(linalg::max_abs(&linalg::sub(&jj, &want)) < 1e-9, "N={} n={n}", cat.big_n());
        }
    }
    let j2 = cat3(2).conjugation(2).unwrap();
    assert!(j2.col_iter().flat_map(|col| col.iter().map(|z| z.im.abs()).collect::<Vec<_>>()).fold(0.0, f64::max) < 1e-12);
    assert!(linalg::max_abs(&linalg::sub(&linalg::mm(&*j2, &*j2), &linalg::eye(8))) < 1e-9);
}

// (J_n ⊗ J_k) conj(V_l^{n,k}) J_l^* lands on V_l^{k,n} with the tensor factors exchanged.
#[test]
fn conjugation_consistency() {
    for cat in [cat3(5), sym4(5)] {
        for (n, k) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 2)] {
            for l in fusion_range(n, k) {
                let v = cat.fusion_isometry(n, k, l).unwrap();
                let (jn, jk, jl) = (cat.conjugation(n).unwrap(), cat.conjugation(k).unwrap(), cat.conjugation(l).unwrap());
                let w = linalg::mm(&linalg::mm(&linalg::kron(&jn, &jk), &linalg::conj(&v)), jl.adjoint());
                assert!(linalg::isometry_defect(&w) < 1e-9);
                let target = swap_rows(&cat.fusion_isometry(k, n, l).unwrap(), cat.dim(k), cat.dim(n));
                let dl = cat.dim(l) as f64;
                assert!((overlap(&target, &w) - dl).abs() < 1e-6 * dl, "N={} ({n},{k},{l})", cat.big_n());
            }
        }
    }
}

#[test]
fn phase_is_deterministic_in_process() {
    let (a, b) = (cat3(5), cat3(5));
    for (n, k, l) in [(2, 2, 2), (3, 2, 1), (2, 3, 5)] {
        let (va, vb) = (a.fusion_isometry(n, k, l).unwrap(), b.fusion_isometry(n, k, l).unwrap());
        assert!(va.as_ref() == vb.as_ref(), "({n},{k},{l})");
    }
}

#[test]
fn cache_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let plain = cat3(4);
    let writer = cat3(4).with_cache(Cache::new(dir.path()));
    let reader = cat3(4).with_cache(Cache::new(dir.path()));
    let cells = [(2, 2, 2), (3, 1, 2), (1, 3, 4)];
    for &(n, k, l) in &cells {
        writer.fusion_isometry(n, k, l).unwrap();
    }
    writer.conjugation(3).unwrap();
    assert_eq!(writer.cache_stats().0, 0);
    for &(n, k, l) in &cells {
        let v = reader.fusion_isometry(n, k, l).unwrap();
        assert!(v.as_ref() == plain.fusion_isometry(n, k, l).unwrap().as_ref());
    }
    assert!(reader.conjugation(3).unwrap().as_ref() == plain.conjugation(3).unwrap().as_ref());
    let (hits, misses) = reader.cache_stats();
    assert!(hits >= cells.len() + 1 && misses == 0, "{hits} {misses}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fusion_isometries_are_isometries(n in 0usize..=3, k in 0usize..=3, pick in 0usize..4) {
        let cat = shared();
        let range = fusion_range(n, k);
        let l = range[pick % range.len()];
        prop_assert!(in_fusion(n, k, l));
        let v = cat.fusion_isometry(n, k, l).unwrap();
        prop_assert_eq!((v.nrows(), v.ncols()), (cat.dim(n) * cat.dim(k), cat.dim(l)));
        prop_assert!(linalg::isometry_defect(&v) < 1e-9);
    }

    // Each fusion isometry intertwines: its range sits inside Π_{n+k} ⊕ … and is orthogonal
    // to every other component.
    #[test]
    fn components_are_orthogonal(n in 1usize..=3, k in 1usize..=3) {
        let cat = shared();
        let range = fusion_range(n, k);
        for (i, &a) in range.iter().enumerate() {
            for &b in &range[i + 1..] {
                let va = cat.fusion_isometry(n, k, a).unwrap();
                let vb = cat.fusion_isometry(n, k, b).unwrap();
                prop_assert!(linalg::max_abs(&linalg::mm(va.adjoint(), &*vb)) < 1e-9);
            }
        }
    }
}
