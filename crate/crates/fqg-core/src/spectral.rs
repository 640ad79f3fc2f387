//! Chebyshev dimensions, fusion index sets, convergence thresholds and
//! the dimension-ratio constant.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FqgError, Result};
use crate::linalg::{self, C64, CMat};

/// The matrix parameter `F` of `O_F^+` together with its size and sign `ε = F F̄`.
#[derive(Clone, Debug)]
pub struct QGParams {
    n: usize,
    f: CMat,
    epsilon: i8,
}

const PARAM_TOL: f64 = 1e-10;

impl QGParams {
    /// Validates `F` and infers `ε`.
    pub fn new(f: CMat) -> Result<Self> {
        let n = f.nrows();
        if f.ncols() != n {
            return Err(FqgError::InvalidParams(format!("F must be square, got {}x{}", n, f.ncols())));
        }
        if n < 3 {
            return Err(FqgError::InvalidParams(format!("N must be at least 3, got {n}")));
        }
        let u = linalg::isometry_defect(&f);
        if u > PARAM_TOL {
            return Err(FqgError::InvalidParams(format!("F is not unitary (defect {u:.3e})")));
        }
        let ffb = linalg::mm(f.as_ref(), f.conjugate());
        let id = linalg::eye(n);
        let plus = linalg::frob(&linalg::sub(&ffb, &id));
        let minus = linalg::frob(&linalg::add(&ffb, &id));
        let epsilon = if plus <= PARAM_TOL {
            1
        } else if minus <= PARAM_TOL {
            -1
        } else {
            return Err(FqgError::InvalidParams(format!(
                "F·conj(F) is not ±I (distances {plus:.3e}, {minus:.3e})"
            )));
        };
        Ok(Self { n, f, epsilon })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(linalg::eye(n))
    }

    /// Block-diagonal `[[0, 1], [-1, 0]]` blocks; needs even `N`, gives `ε = −1`.
    pub fn symplectic(n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(FqgError::InvalidParams(format!("symplectic F needs even N, got {n}")));
        }
        let mut f = linalg::zeros(n, n);
        for b in 0..n / 2 {
            f[(2 * b, 2 * b + 1)] = linalg::ONE;
            f[(2 * b + 1, 2 * b)] = -linalg::ONE;
        }
        Self::new(f)
    }

    /// `F = diag(exp(2πi·j/N))`; unitary, non-real, `ε = +1`.
    pub fn phase_twisted(n: usize) -> Result<Self> {
        let mut f = linalg::zeros(n, n);
        for j in 0..n {
            let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            f[(j, j)] = C64::from_polar(1.0, th);
        }
        Self::new(f)
    }

    /// Named parameter families used by configs and tests.
    pub fn named(name: &str, n: usize) -> Result<Self> {
        match name {
            "identity" => Self::identity(n),
            "symplectic" => Self::symplectic(n),
            "phase" | "phase-twisted" => Self::phase_twisted(n),
            other => Err(FqgError::InvalidParams(format!("unknown parameter family '{other}'"))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self) -> &CMat {
        &self.f
    }

    pub fn epsilon(&self) -> i8 {
        self.epsilon
    }

    pub fn is_identity(&self) -> bool {
        linalg::frob(&linalg::sub(&self.f, &linalg::eye(self.n))) == 0.0
    }

    /// SHA-256 over `N` (u32 LE) followed by the entries of `F`, column-major, (re, im) f64 LE.
    pub fn f_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update((self.n as u32).to_le_bytes());
        for j in 0..self.n {
            for i in 0..self.n {
                let z = self.f[(i, j)];
                h.update(z.re.to_le_bytes());
                h.update(z.im.to_le_bytes());
            }
        }
        h.finalize().into()
    }

    pub fn f_hash_hex(&self) -> String {
        hex::encode(self.f_hash())
    }
}

/// `ρ > 1` with `ρ + 1/ρ = N`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RhoData {
    pub n: usize,
    pub rho: f64,
}

impl RhoData {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(FqgError::InvalidParams(format!("ρ needs N ≥ 3, got {n}")));
        }
        Ok(Self { n, rho: rho(n as f64) })
    }
}

/// Larger root of `ρ² − xρ + 1 = 0`; requires `x > 2`.
pub fn rho(x: f64) -> f64 {
    (x + (x * x - 4.0).sqrt()) / 2.0
}

/// `S_n(N)` in exact integer arithmetic; errors on `u128` overflow, in which case
/// [`chebyshev_log`] / [`chebyshev_real`] are the fallback.
pub fn chebyshev_dim(n: usize, big_n: u128) -> Result<u128> {
    let (mut a, mut b) = (1u128, big_n); // S_0, S_1
    if n == 0 {
        return Ok(1);
    }
    for _ in 1..n {
        let c = b
            .checked_mul(big_n)
            .and_then(|v| v.checked_sub(a))
            .ok_or(FqgError::DimOverflow { n, big_n: big_n as usize })?;
        a = b;
        b = c;
    }
    Ok(b)
}

/// `S_n(N)` as a `usize`, for indexing dimensions.
pub fn dim(n: usize, big_n: usize) -> usize {
    chebyshev_dim(n, big_n as u128).expect("dimension overflow") as usize
}

/// Real-valued `S_n(x)` by the three-term recursion (any real `x`).
pub fn chebyshev_real(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for _ in 1..n {
        let c = x * b - a;
        a = b;
        b = c;
    }
    b
}

/// `ln S_n(x)` for `x ≥ 2` via the ratio recursion `q_{m+1} = x − 1/q_m`.
pub fn chebyshev_log(n: usize, x: f64) -> f64 {
    let mut q = x;
    let mut s = 0.0;
    for m in 1..=n {
        if m > 1 {
            q = x - 1.0 / q;
        }
        s += q.ln();
    }
    s
}

/// `[ln S_0(x), …, ln S_{n_max}(x)]` for `x ≥ 2`, incrementally.
pub fn chebyshev_log_table(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    let (mut q, mut s) = (x, 0.0);
    for m in 1..=n_max {
        if m > 1 {
            q = x - 1.0 / q;
        }
        s += q.ln();
        out.push(s);
    }
    out
}

/// `(ρ^{n+1} − ρ^{−n−1}) / (ρ − ρ^{−1})`.
pub fn chebyshev_closed_form(n: usize, big_n: f64) -> f64 {
    let r = rho(big_n);
    let e = (n + 1) as i32;
    (r.powi(e) - r.powi(-e)) / (r - 1.0 / r)
}

/// `ρ(N)^{−2/p}`; `p = ∞` gives 1.
pub fn threshold(p: f64, big_n: usize) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(FqgError::Domain(format!("threshold needs p ≥ 1, got {p}")));
    }
    if big_n < 3 {
        return Err(FqgError::Domain(format!("threshold needs N ≥ 3, got {big_n}")));
    }
    if p.is_infinite() {
        return Ok(1.0);
    }
    Ok(rho(big_n as f64).powf(-2.0 / p))
}

/// `[|n−k|, |n−k|+2, …, n+k]`.
pub fn fusion_range(n: usize, k: usize) -> Vec<usize> {
    let lo = n.abs_diff(k);
    (lo..=n + k).step_by(2).collect()
}

pub fn in_fusion(n: usize, k: usize, l: usize) -> bool {
    l >= n.abs_diff(k) && l <= n + k && (n + k - l) % 2 == 0
}

/// `(1/d_r) ∏_{s=1}^{r} d_s d_{n−r+s−1} d_{k−r+s−1} / (d_{l+s} d_{s−1}²)`, `r = (n+k−l)/2`.
pub fn dim_ratio_lhs(n: usize, k: usize, l: usize, big_n: usize) -> Result<f64> {
    if !in_fusion(n, k, l) {
        return Err(FqgError::NotInFusion { n, k, l });
    }
    let r = (n + k - l) / 2;
    let d = |m: usize| chebyshev_real(m, big_n as f64);
    let mut prod = 1.0;
    for s in 1..=r {
        prod *= d(s) * d(n - r + s - 1) * d(k - r + s - 1) / (d(l + s) * d(s - 1) * d(s - 1));
    }
    Ok(prod / d(r))
}

/// `dim_ratio_lhs / (d_l / (d_n d_k))^{1/2}`.
pub fn dim_ratio(n: usize, k: usize, l: usize, big_n: usize) -> Result<f64> {
    let lhs = dim_ratio_lhs(n, k, l, big_n)?;
    let d = |m: usize| chebyshev_real(m, big_n as f64);
    Ok(lhs / (d(l) / (d(n) * d(k))).sqrt())
}

/// Supremum of [`dim_ratio`] over `n, k ≤ max_level` and all admissible `l`.
pub fn empirical_dim_constant(max_level: usize, big_n: usize) -> f64 {
    let mut best = 0.0f64;
    for n in 0..=max_level {
        for k in 0..=max_level {
            for l in fusion_range(n, k) {
                best = best.max(dim_ratio(n, k, l, big_n).unwrap());
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesVerdict {
    Converges,
    Diverges,
    Boundary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesReport {
    pub r: f64,
    pub p: f64,
    pub big_n: usize,
    pub threshold: f64,
    pub analytic: SeriesVerdict,
    pub empirical: SeriesVerdict,
    /// `r^p S_{n+1}² / S_n²` at `n_max`.
    pub tail_ratio: f64,
    /// `ln Σ_{m≤n} r^{pm} S_m(N)²` for `n = 0..=n_max`.
    pub log_partial_sums: Vec<f64>,
}

pub const BOUNDARY_DELTA: f64 = 1e-6;

/// Classifies `Σ r^{pn} S_n(N)²` analytically (threshold) and by the tail ratio at `n_max`.
pub fn series_classify(r: f64, p: f64, big_n: usize, n_max: usize) -> Result<SeriesReport> {
    series_classify_with(r, p, big_n, n_max, BOUNDARY_DELTA, 1)
}

/// Shared worker: `stride` = 1 gives the full series, 2 the even-index subseries.
pub(crate) fn series_classify_with(
    r: f64,
    p: f64,
    big_n: usize,
    n_max: usize,
    delta: f64,
    stride: usize,
) -> Result<SeriesReport> {
    if !(r > 0.0 && r < 1.0) {
        return Err(FqgError::Domain(format!("series needs 0 < r < 1, got {r}")));
    }
    if n_max < 50 {
        return Err(FqgError::Domain(format!("series needs n_max ≥ 50, got {n_max}")));
    }
    let th = threshold(p, big_n)?;
    let analytic = if (r - th).abs() < delta {
        SeriesVerdict::Boundary
    } else if r < th {
        SeriesVerdict::Converges
    } else {
        SeriesVerdict::Diverges
    };
    let x = big_n as f64;
    let lr = r.ln();
    let term = |m: usize| p * m as f64 * lr + 2.0 * chebyshev_log(m, x);
    let mut log_partial_sums = Vec::new();
    let mut acc = f64::NEG_INFINITY;
    let mut m = 0;
    while m <= n_max {
        acc = log_add(acc, term(m));
        log_partial_sums.push(acc);
        m += stride;
    }
    let last = m - stride;
    let log_ratio = term(last + stride) - term(last);
    let tail_ratio = log_ratio.exp();
    // margin δ in r moves ln(ratio) by about stride·p·δ/r
    let emp_margin = stride as f64 * p * delta / r;
    let empirical = if log_ratio.abs() < emp_margin {
        SeriesVerdict::Boundary
    } else if log_ratio < 0.0 {
        SeriesVerdict::Converges
    } else {
        SeriesVerdict::Diverges
    };
    Ok(SeriesReport { r, p, big_n, threshold: th, analytic, empirical, tail_ratio, log_partial_sums })
}

pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_n3() {
        let v: Vec<u128> = (0..7).map(|n| chebyshev_dim(n, 3).unwrap()).collect();
        assert_eq!(v, vec![1, 3, 8, 21, 55, 144, 377]);
    }

    #[test]
    fn dims_overflow_is_reported() {
        assert!(matches!(chebyshev_dim(90, 5), Err(FqgError::DimOverflow { .. })));
        assert!(chebyshev_dim(90, 3).is_ok());
        assert!(chebyshev_dim(50, 5).is_ok());
    }

    #[test]
    fn thresholds() {
        assert!((threshold(2.0, 3).unwrap() - 0.381_966_011_250_105_1).abs() < 1e-12);
        assert!((threshold(4.0, 3).unwrap() - 0.618_033_988_749_894_8).abs() < 1e-12);
        assert_eq!(threshold(f64::INFINITY, 3).unwrap(), 1.0);
    }

    #[test]
    fn fusion_examples() {
        assert_eq!(fusion_range(1, 1), vec![0, 2]);
        assert_eq!(fusion_range(2, 3), vec![1, 3, 5]);
        assert_eq!(fusion_range(0, 4), vec![4]);
    }

    #[test]
    fn dim_ratio_examples() {
        assert_eq!(dim_ratio_lhs(2, 3, 5, 3).unwrap(), 1.0);
        // single-factor product: (d_1 d_0 d_0)/(d_1 d_0²) / d_1 = 1/3
        assert!((dim_ratio_lhs(1, 1, 0, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((dim_ratio(1, 1, 0, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(dim_ratio_lhs(1, 1, 1, 3), Err(FqgError::NotInFusion { .. })));
    }

    #[test]
    fn series_examples() {
        let c = series_classify(0.30, 2.0, 3, 200).unwrap();
        assert_eq!((c.analytic, c.empirical), (SeriesVerdict::Converges, SeriesVerdict::Converges));
        let d = series_classify(0.45, 2.0, 3, 200).unwrap();
        assert_eq!((d.analytic, d.empirical), (SeriesVerdict::Diverges, SeriesVerdict::Diverges));
        let b = series_classify(threshold(2.0, 3).unwrap(), 2.0, 3, 200).unwrap();
        assert_eq!((b.analytic, b.empirical), (SeriesVerdict::Boundary, SeriesVerdict::Boundary));
    }

    #[test]
    fn named_params() {
        assert_eq!(QGParams::identity(3).unwrap().epsilon(), 1);
        assert_eq!(QGParams::symplectic(4).unwrap().epsilon(), -1);
        assert_eq!(QGParams::phase_twisted(3).unwrap().epsilon(), 1);
        assert!(QGParams::symplectic(3).is_err());
        assert!(QGParams::identity(2).is_err());
    }
}
