use fqg_core::spectral::*;
use proptest::prelude::*;

// Oracle: S_n(N) summed as Σ_j (−1)^j C(n−j, j) N^{n−2j}, independent of the recursion.
fn binomial_dim(n: usize, big_n: u128) -> i128 {
    let mut s: i128 = 0;
    for j in 0..=n / 2 {
        let mut c: i128 = 1;
        for i in 0..j {
            c = c * (n - j - i) as i128 / (i + 1) as i128;
        }
        let t = c * (big_n as i128).pow((n - 2 * j) as u32);
        s += if j % 2 == 0 { t } else { -t };
    }
    s
}

#[test]
fn frozen_dimensions() {
    let d: Vec<u128> = (0..9).map(|n| chebyshev_dim(n, 3).unwrap()).collect();
    assert_eq!(d, vec![1, 3, 8, 21, 55, 144, 377, 987, 2584]);
    assert_eq!(chebyshev_dim(0, 7).unwrap(), 1);
    assert_eq!(chebyshev_dim(3, 4).unwrap(), 56);
}

#[test]
fn dimensions_match_binomial_sum() {
    for big_n in 2..=6u128 {
        for n in 0..=20 {
            assert_eq!(chebyshev_dim(n, big_n).unwrap() as i128, binomial_dim(n, big_n), "n={n} N={big_n}");
        }
    }
}

#[test]
fn frozen_thresholds() {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((threshold(2.0, 3).unwrap() - 1.0 / (phi * phi)).abs() < 1e-14);
    assert!((threshold(4.0, 3).unwrap() - 1.0 / phi).abs() < 1e-14);
    assert!((threshold(2.0, 3).unwrap() - 0.381_966_011_250_105_1).abs() < 1e-15);
    assert!(threshold(1e9, 3).unwrap() > 1.0 - 1e-8);
    assert!(threshold(0.5, 3).is_err());
}

#[test]
fn rho_relation() {
    for n in 3..=12 {
        let r = rho(n as f64);
        assert!((r + 1.0 / r - n as f64).abs() < 1e-12);
        assert!(r > 1.0);
    }
}

#[test]
fn fusion_range_examples() {
    assert_eq!(fusion_range(2, 3), vec![1, 3, 5]);
    assert_eq!(fusion_range(0, 4), vec![4]);
    assert!(in_fusion(2, 2, 0) && !in_fusion(2, 2, 1) && !in_fusion(1, 1, 3));
}

#[test]
fn dim_constant_is_finite_and_grows_slowly() {
    let a = empirical_dim_constant(6, 3);
    let b = empirical_dim_constant(12, 3);
    assert!(a.is_finite() && b.is_finite() && a <= b + 1e-12);
    assert!(b < 2.0 * a, "{a} {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_matches_closed_form(n in 0usize..=30, big_n in 3usize..=6) {
        let exact = chebyshev_dim(n, big_n as u128).unwrap() as f64;
        let closed = chebyshev_closed_form(n, big_n as f64);
        prop_assert!((exact - closed).abs() <= 1e-10 * exact);
        prop_assert!((chebyshev_real(n, big_n as f64) - exact).abs() <= 1e-10 * exact);
        prop_assert!((chebyshev_log(n, big_n as f64) - exact.ln()).abs() <= 1e-10);
    }

    #[test]
    fn fusion_dimension_identity(n in 0usize..=8, k in 0usize..=8, big_n in 3u128..=5) {
        let lhs: u128 = fusion_range(n, k).into_iter().map(|l| chebyshev_dim(l, big_n).unwrap()).sum();
        prop_assert_eq!(lhs, chebyshev_dim(n, big_n).unwrap() * chebyshev_dim(k, big_n).unwrap());
    }

    #[test]
    fn threshold_is_monotone(p1 in 1.0f64..20.0, dp in 0.01f64..10.0, big_n in 3usize..=8) {
        let (a, b) = (threshold(p1, big_n).unwrap(), threshold(p1 + dp, big_n).unwrap());
        prop_assert!(a < b && b < 1.0 && a > 0.0);
        prop_assert!(threshold(p1, big_n + 1).unwrap() < a);
    }

    #[test]
    fn series_verdicts_agree_off_the_boundary(p in 1.5f64..6.0, off in 0.01f64..0.3, above in any::<bool>(), big_n in 3usize..=5) {
        let th = threshold(p, big_n).unwrap();
        let r = if above { th + off } else { th - off };
        prop_assume!(r > 0.0 && r < 1.0);
        let rep = series_classify(r, p, big_n, 4000).unwrap();
        let want = if above { SeriesVerdict::Diverges } else { SeriesVerdict::Converges };
        prop_assert_eq!(rep.analytic, want);
        prop_assert_eq!(rep.empirical, want);
    }

    #[test]
    fn dim_ratio_is_bounded_by_constant(n in 0usize..=6, k in 0usize..=6, big_n in 3usize..=5) {
        let c = empirical_dim_constant(6, big_n);
        for l in fusion_range(n, k) {
            prop_assert!(dim_ratio(n, k, l, big_n).unwrap() <= c * (1.0 + 1e-12));
        }
    }
}
