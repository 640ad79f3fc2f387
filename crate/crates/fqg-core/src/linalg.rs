//! Dense complex helpers on top of `faer`.
//!
//! Tensor conventions used throughout the crate: a vector of `A ⊗ B` with
//! `dim A = a`, `dim B = b` is indexed by `i·b + j` (first factor most
//! significant), so `x ⊗ y` acting on it is `faer`'s `kron(x, y)`.

use faer::linalg::matmul::matmul;
use faer::mat::AsMatRef;
use faer::traits::Conjugate;
use faer::{Accum, Mat, Par, Side};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{FqgError, Result};

pub use num_complex::Complex64 as C64;
pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    Mat::zeros(r, c)
}

pub fn eye(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn conj(a: &CMat) -> CMat {
    a.conjugate().to_owned()
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose().to_owned()
}

/// `a * b` for any (possibly conjugated or adjoint) views, single-threaded.
/// Row-major operands are repacked first; the kernel is much slower on them.
pub fn mm<L, R>(a: L, b: R) -> CMat
where
    L: AsMatRef<Rows = usize, Cols = usize>,
    L::T: Conjugate<Canonical = C64>,
    R: AsMatRef<Rows = usize, Cols = usize>,
    R::T: Conjugate<Canonical = C64>,
{
    let (a, b) = (a.as_mat_ref(), b.as_mat_ref());
    let mut out = zeros(a.nrows(), b.ncols());
    let pack_a = (a.row_stride() != 1 && a.nrows() > 1).then(|| a.to_owned());
    let pack_b = (b.row_stride() != 1 && b.nrows() > 1).then(|| b.to_owned());
    match (&pack_a, &pack_b) {
        (None, None) => matmul(out.as_mut(), Accum::Replace, a, b, ONE, Par::Seq),
        (Some(pa), None) => matmul(out.as_mut(), Accum::Replace, pa.as_ref(), b, ONE, Par::Seq),
        (None, Some(pb)) => matmul(out.as_mut(), Accum::Replace, a, pb.as_ref(), ONE, Par::Seq),
        (Some(pa), Some(pb)) => matmul(out.as_mut(), Accum::Replace, pa.as_ref(), pb.as_ref(), ONE, Par::Seq),
    }
    out
}

/// `a^* b`.
pub fn mhm(a: &CMat, b: &CMat) -> CMat {
    mm(a.adjoint(), b)
}

pub fn scale(a: &CMat, s: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn add(a: &CMat, b: &CMat) -> CMat {
    a + b
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    a - b
}

pub fn frob(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> C64 {
    let mut s = ZERO;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Hermitian part `(a + a^*)/2`.
pub fn herm_part(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Operator-norm distance from `a^* a` to the identity, bounded by the Frobenius norm.
pub fn isometry_defect(a: &CMat) -> f64 {
    let g = mhm(a, a);
    frob(&sub(&g, &eye(g.nrows())))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let h = herm_part(a);
    let e = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| FqgError::Numerics(format!("eigensolver: {e:?}")))?;
    let vals = (0..h.nrows()).map(|i| e.S()[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn herm_eigvals(a: &CMat) -> Result<Vec<f64>> {
    let h = herm_part(a);
    let v = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| FqgError::Numerics(format!("eigensolver: {e:?}")))?;
    Ok(v)
}

pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values().map_err(|e| FqgError::Numerics(format!("svd: {e:?}")))
}

/// Thin SVD `a = u diag(s) v^*`.
pub fn svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let s = a.thin_svd().map_err(|e| FqgError::Numerics(format!("svd: {e:?}")))?;
    let k = a.nrows().min(a.ncols());
    let sv = (0..k).map(|i| s.S()[i].re).collect();
    Ok((s.U().to_owned(), sv, s.V().to_owned()))
}

/// Schatten q-norm from singular values; `q = f64::INFINITY` gives the operator norm.
pub fn schatten_from_sv(sv: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return sv.iter().cloned().fold(0.0, f64::max);
    }
    let m = sv.iter().cloned().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    // scale out the largest value so large blocks do not overflow
    let s: f64 = sv.iter().map(|s| (s / m).powf(q)).sum();
    m * s.powf(1.0 / q)
}

pub fn schatten(a: &CMat, q: f64) -> Result<f64> {
    if q == 2.0 {
        return Ok(frob(a));
    }
    Ok(schatten_from_sv(&singular_values(a)?, q))
}

pub fn op_norm(a: &CMat) -> Result<f64> {
    schatten(a, f64::INFINITY)
}

/// Multiply column `j` so that its first entry of largest modulus is real positive.
pub fn fix_column_phase(a: &mut CMat, j: usize) {
    let col = a.col_as_slice_mut(j);
    let m = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return;
    }
    let idx = col.iter().position(|z| z.norm() >= m * (1.0 - 1e-10)).unwrap();
    let ph = col[idx].conj() / col[idx].norm();
    for z in col.iter_mut() {
        *z *= ph;
    }
}

/// Unitary polar factor of a matrix that is (numerically) a positive multiple of an
/// isometry. Returns the factor and the multiple. Fails when the columns are not
/// uniformly scaled within `tol` (relative), which signals a rank or convention defect.
pub fn polar_isometry(m: &CMat, tol: f64, what: &str) -> Result<(CMat, f64)> {
    let d = m.ncols();
    let g = mhm(m, m);
    let c2 = trace(&g).re / d as f64;
    if !(c2 > 0.0) {
        return Err(FqgError::Rank { what: what.into(), got: 0, expected: d });
    }
    let dev = frob(&sub(&scale(&g, c(1.0 / c2)), &eye(d)));
    if dev > tol {
        return Err(FqgError::Invariant {
            what: format!("{what}: candidate is not proportional to an isometry"),
            value: dev,
            tol,
        });
    }
    let cs = c2.sqrt();
    let mut u = scale(m, c(1.0 / cs));
    // Newton–Schulz: converges quadratically to the polar factor from this distance.
    let mut prev = f64::INFINITY;
    for _ in 0..8 {
        let uu = mhm(&u, &u);
        let err = frob(&sub(&uu, &eye(d)));
        // stop at the rounding floor or once quadratic convergence stalls
        if err < 1e-15 * (d as f64).sqrt() || err > 0.5 * prev {
            break;
        }
        prev = err;
        let corr = Mat::from_fn(d, d, |i, j| {
            let id = if i == j { 3.0 } else { 0.0 };
            (c(id) - uu[(i, j)]) * 0.5
        });
        u = mm(u.as_ref(), corr.as_ref());
    }
    Ok((u, cs))
}

/// Orthonormal basis of the orthogonal complement of `range(y)` (y of full column rank),
/// from the full Householder QR of `y`.
pub fn orth_complement(y: &CMat) -> CMat {
    let m = y.nrows();
    let k = y.ncols();
    if k == 0 {
        return eye(m);
    }
    let q = y.qr().compute_Q();
    q.get(.., k..).to_owned()
}

/// Orthonormal basis of `range(y)` with numerical rank cut at `rel_tol · σ_max`.
pub fn orth_range(y: &CMat, rel_tol: f64) -> Result<CMat> {
    if y.ncols() == 0 {
        return Ok(zeros(y.nrows(), 0));
    }
    let (u, s, _) = svd(y)?;
    let smax = s.first().cloned().unwrap_or(0.0);
    let r = s.iter().filter(|&&v| v > rel_tol * smax).count();
    Ok(u.get(.., ..r).to_owned())
}

/// Standard complex Gaussian matrix (real and imaginary parts of variance 1/2).
pub fn random_gaussian<R: Rng>(rng: &mut R, r: usize, c_: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(r, c_, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        C64::new(a * s, b * s)
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    herm_part(&random_gaussian(rng, n, n))
}

/// Regroup a `(da·db) × L` matrix (row `a·db + b`) into `da × (db·L)` (column `b + db·c`).
pub fn rows_first(m: &CMat, da: usize, db: usize) -> CMat {
    let l = m.ncols();
    let mut out = zeros(da, db * l);
    for c in 0..l {
        let col = m.col_as_slice(c);
        for b in 0..db {
            let oc = out.col_as_slice_mut(b + db * c);
            for a in 0..da {
                oc[a] = col[a * db + b];
            }
        }
    }
    out
}

/// Inverse of [`rows_first`].
pub fn unrows_first(t: &CMat, db: usize) -> CMat {
    let da = t.nrows();
    let l = t.ncols() / db;
    let mut out = zeros(da * db, l);
    for c in 0..l {
        let oc = out.col_as_slice_mut(c);
        for b in 0..db {
            let col = t.col_as_slice(b + db * c);
            for a in 0..da {
                oc[a * db + b] = col[a];
            }
        }
    }
    out
}

/// Regroup a `(da·db) × L` matrix into `db × (da·L)` (column `a + da·c`).
pub fn rows_second(m: &CMat, da: usize, db: usize) -> CMat {
    let l = m.ncols();
    let mut out = zeros(db, da * l);
    for c in 0..l {
        let col = m.col_as_slice(c);
        for a in 0..da {
            out.col_as_slice_mut(a + da * c).copy_from_slice(&col[a * db..(a + 1) * db]);
        }
    }
    out
}

/// Inverse of [`rows_second`].
pub fn unrows_second(t: &CMat, da: usize) -> CMat {
    let db = t.nrows();
    let l = t.ncols() / da;
    let mut out = zeros(da * db, l);
    for c in 0..l {
        let oc = out.col_as_slice_mut(c);
        for a in 0..da {
            oc[a * db..(a + 1) * db].copy_from_slice(t.col_as_slice(a + da * c));
        }
    }
    out
}

/// `(1_{dx} ⊗ y) v`.
pub fn apply_second(y: &CMat, v: &CMat, dx: usize) -> CMat {
    assert_eq!(v.nrows(), dx * y.ncols());
    unrows_second(&mm(y, &rows_second(v, dx, y.ncols())), dx)
}

/// `(x ⊗ 1_{dy}) v`.
pub fn apply_first(x: &CMat, v: &CMat, dy: usize) -> CMat {
    assert_eq!(v.nrows(), x.ncols() * dy);
    unrows_first(&mm(x, &rows_first(v, x.ncols(), dy)), dy)
}

/// `(x ⊗ y) v` for every column of `v`, where `v` has `dx·dy` rows.
/// Never materializes the Kronecker product.
pub fn apply_kron(x: &CMat, y: &CMat, v: &CMat) -> CMat {
    assert_eq!(v.nrows(), x.ncols() * y.ncols());
    apply_first(x, &apply_second(y, v, x.ncols()), y.nrows())
}

/// `Tr_2(p m^*)` for `p, m` with `da·db` rows: `Σ_{b,c} p[(a,b),c] conj(m[(a',b),c])`.
pub fn pair_trace_second(p: &CMat, m: &CMat, da: usize, db: usize) -> CMat {
    let (pa, ma) = (rows_first(p, da, db), rows_first(m, da, db));
    mm(&pa, ma.adjoint())
}

/// `Tr_1(p m^*)`.
pub fn pair_trace_first(p: &CMat, m: &CMat, da: usize, db: usize) -> CMat {
    let (pb, mb) = (rows_second(p, da, db), rows_second(m, da, db));
    mm(&pb, mb.adjoint())
}

/// Partial trace over the second tensor factor of a `(da·db) × (da·db)` matrix.
pub fn partial_trace_second(z: &CMat, da: usize, db: usize) -> CMat {
    Mat::from_fn(da, da, |a, a2| (0..db).map(|b| z[(a * db + b, a2 * db + b)]).sum())
}

/// Partial trace over the first tensor factor.
pub fn partial_trace_first(z: &CMat, da: usize, db: usize) -> CMat {
    Mat::from_fn(db, db, |b, b2| (0..da).map(|a| z[(a * db + b, a * db + b2)]).sum())
}

/// Tensor-reshape helper: interpret a column-major `(da·db) × k` matrix as `k` matrices
/// of shape `da × db` (row index `a`, column index `b`).
pub fn unvec(col: &[C64], da: usize, db: usize) -> CMat {
    Mat::from_fn(da, db, |a, b| col[a * db + b])
}

pub fn vec_into(m: &CMat, out: &mut [C64]) {
    let db = m.ncols();
    for a in 0..m.nrows() {
        for b in 0..db {
            out[a * db + b] = m[(a, b)];
        }
    }
}

/// Relative change of the top Ritz value over three steps at which Lanczos stops.
pub const LANCZOS_RTOL: f64 = 1e-12;

/// Lanczos with full reorthogonalization for the largest eigenvalue of a Hermitian
/// positive semidefinite operator given as a closure. Ritz values are lower bounds
/// for the top eigenvalue; returns the final one and the Ritz sequence.
pub fn lanczos_max<F>(dim: usize, iters: usize, start: &[C64], mut op: F) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let m = iters.min(dim).max(1);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m);
    let s0 = norm(start);
    if s0 == 0.0 {
        return Err(FqgError::Numerics("Lanczos start vector is zero".into()));
    }
    basis.push(start.iter().map(|z| z / s0).collect());
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut ritz = Vec::new();
    for j in 0..m {
        let mut w = op(&basis[j])?;
        let a: C64 = basis[j].iter().zip(&w).map(|(u, v)| u.conj() * v).sum();
        alpha.push(a.re);
        // full reorthogonalization (twice is enough)
        for _ in 0..2 {
            for b in &basis {
                let cf: C64 = b.iter().zip(&w).map(|(u, v)| u.conj() * v).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= cf * bi;
                }
            }
        }
        let t = tridiag_max(&alpha, &beta)?;
        ritz.push(t);
        let bn = norm(&w);
        let settled = j >= 3 && (t - ritz[j - 3]).abs() <= LANCZOS_RTOL * t.abs();
        if j + 1 == m || settled || bn <= 1e-13 * t.abs().max(1e-300) {
            break;
        }
        beta.push(bn);
        basis.push(w.iter().map(|z| z / bn).collect());
    }
    Ok((*ritz.last().unwrap(), ritz))
}

fn tridiag_max(alpha: &[f64], beta: &[f64]) -> Result<f64> {
    let k = alpha.len();
    let t = Mat::from_fn(k, k, |i, j| {
        if i == j {
            c(alpha[i])
        } else if i + 1 == j {
            c(beta[i])
        } else if j + 1 == i {
            c(beta[j])
        } else {
            ZERO
        }
    });
    Ok(*herm_eigvals(&t)?.last().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::MatRef;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn apply_kron_matches_explicit_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_gaussian(&mut rng, 3, 3);
        let y = random_gaussian(&mut rng, 4, 4);
        let v = random_gaussian(&mut rng, 12, 5);
        let a = apply_kron(&x, &y, &v);
        let b = mm(kron(&x, &y).as_ref(), v.as_ref());
        assert!(frob(&sub(&a, &b)) < 1e-12);
    }

    #[test]
    fn polar_recovers_scaled_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_gaussian(&mut rng, 9, 4);
        let q = orth_range(&g, 1e-12).unwrap();
        let (u, s) = polar_isometry(&scale(&q, c(2.5)), 1e-8, "t").unwrap();
        assert!((s - 2.5).abs() < 1e-12);
        assert!(frob(&sub(&u, &q)) < 1e-12);
    }

    #[test]
    fn complement_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = random_gaussian(&mut rng, 10, 3);
        let q = orth_complement(&y);
        assert_eq!(q.ncols(), 7);
        assert!(frob(&mhm(&q, &y)) < 1e-12);
        assert!(isometry_defect(&q) < 1e-12);
    }

    #[test]
    fn partial_traces_of_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_gaussian(&mut rng, 3, 3);
        let y = random_gaussian(&mut rng, 2, 2);
        let k = kron(&x, &y);
        let p2 = partial_trace_second(&k, 3, 2);
        let p1 = partial_trace_first(&k, 3, 2);
        assert!(frob(&sub(&p2, &scale(&x, trace(&y)))) < 1e-12);
        assert!(frob(&sub(&p1, &scale(&y, trace(&x)))) < 1e-12);
    }

    #[test]
    fn lanczos_finds_top_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_gaussian(&mut rng, 40, 40);
        let a = mhm(&g, &g);
        let top = *herm_eigvals(&a).unwrap().last().unwrap();
        let start: Vec<C64> = (0..40).map(|i| c(1.0 + i as f64)).collect();
        let (v, ritz) = lanczos_max(40, 40, &start, |x| {
            let xm = MatRef::from_column_major_slice(x, 40, 1);
            Ok(mm(&a, xm).col_as_slice(0).to_vec())
        })
        .unwrap();
        assert!((v - top).abs() < 1e-9 * top);
        assert!(ritz.windows(2).all(|w| w[1] >= w[0] - 1e-9 * top));
    }

    #[test]
    fn schatten_norms_of_diagonal() {
        let sv = [3.0, 4.0];
        assert!((schatten_from_sv(&sv, 2.0) - 5.0).abs() < 1e-12);
        assert!((schatten_from_sv(&sv, 1.0) - 7.0).abs() < 1e-12);
        assert_eq!(schatten_from_sv(&sv, f64::INFINITY), 4.0);
    }
}
