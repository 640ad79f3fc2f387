//! Representation-category data of `O_F^+`: the duality vector, Jones–Wenzl
//! projections, orthonormal bases of the irreducibles, fusion isometries and
//! conjugation maps, memoized per [`Category`] and optionally persisted.
//!
//! Coordinates: a vector of `(ℂ^N)^{⊗n}` is indexed by base-`N` digits with the
//! first strand most significant. `H_n ⊂ (ℂ^N)^{⊗n}` is spanned by the columns of
//! `B_n`, and `V_l^{n,k}` is expressed in the `B_n ⊗ B_k` coordinates.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use faer::Mat;
use serde::Serialize;

use crate::cache::{Cache, Key, Kind};
use crate::error::{FqgError, Result};
use crate::linalg::{self, c, C64, CMat, ONE, ZERO};
use crate::spectral::{self, QGParams};

pub const DEFAULT_MAX_LEVEL: usize = 7;
const POLAR_TOL: f64 = 1e-6;
const JW_TOL: f64 = 1e-9;

#[derive(Default)]
struct Memo {
    projections: HashMap<usize, Arc<CMat>>,
    bases: HashMap<usize, Arc<CMat>>,
    fusions: HashMap<(usize, usize, usize), Arc<CMat>>,
    conjugations: HashMap<usize, Arc<CMat>>,
}

/// Category context: parameters, level budget, memo tables and optional disk cache.
pub struct Category {
    params: QGParams,
    max_level: usize,
    cache: Option<Cache>,
    t: CMat,
    memo: Mutex<Memo>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl std::fmt::Debug for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Category")
            .field("N", &self.params.n())
            .field("epsilon", &self.params.epsilon())
            .field("max_level", &self.max_level)
            .finish()
    }
}

impl Category {
    pub fn new(params: QGParams, max_level: usize) -> Self {
        let t = invariant_vector(&params);
        Self {
            params,
            max_level,
            cache: None,
            t,
            memo: Mutex::new(Memo::default()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn with_cache(mut self, cache: Cache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn params(&self) -> &QGParams {
        &self.params
    }

    pub fn big_n(&self) -> usize {
        self.params.n()
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn dim(&self, n: usize) -> usize {
        spectral::dim(n, self.big_n())
    }

    /// `(disk hits, disk misses)` since construction.
    pub fn cache_stats(&self) -> (usize, usize) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    /// `t_F = N^{−1/2} Σ_i e_i ⊗ F e_i` as an `N² × 1` column.
    pub fn invariant_vector(&self) -> &CMat {
        &self.t
    }

    /// `(t* ⊗ id)(id ⊗ t)` as an `N × N` matrix; equals `(ε/N)·I`.
    pub fn zigzag(&self) -> CMat {
        let n = self.big_n();
        let tm = linalg::unvec(self.t.col_as_slice(0), n, n);
        // (t*⊗id)(e_a ⊗ t) = Σ_{i} conj(T[i, ·]) ... contracted: Σ_{i,j} conj(t[a,i]) T[i,j] e_j
        Mat::from_fn(n, n, |j, a| (0..n).map(|i| tm[(a, i)].conj() * tm[(i, j)]).sum())
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n > self.max_level {
            return Err(FqgError::LevelBudget { level: n, max: self.max_level });
        }
        Ok(())
    }

    fn key(&self, kind: Kind, levels: [usize; 3]) -> Key {
        Key {
            big_n: self.big_n() as u32,
            f_hash: self.params.f_hash(),
            kind,
            levels: levels.map(|v| v as u32),
        }
    }

    fn load_or<F>(&self, kind: Kind, levels: [usize; 3], build: F) -> Result<Arc<CMat>>
    where
        F: FnOnce() -> Result<CMat>,
    {
        let key = self.key(kind, levels);
        if let Some(cache) = &self.cache {
            if let Some(m) = cache.get(&key)? {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(Arc::new(m));
            }
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        let m = build()?;
        if let Some(cache) = &self.cache {
            cache.put(&key, &m)?;
        }
        Ok(Arc::new(m))
    }

    /// Jones–Wenzl projection `Π_n` on `(ℂ^N)^{⊗n}` by the Wenzl recursion.
    pub fn jw_projection(&self, n: usize) -> Result<Arc<CMat>> {
        self.check_level(n)?;
        if let Some(p) = self.memo.lock().unwrap().projections.get(&n) {
            return Ok(p.clone());
        }
        let p = if n <= 1 {
            Arc::new(linalg::eye(self.big_n().pow(n as u32)))
        } else {
            let prev = self.jw_projection(n - 1)?;
            self.load_or(Kind::Projection, [n, 0, 0], || self.wenzl_step(&prev, n - 1))?
        };
        self.memo.lock().unwrap().projections.insert(n, p.clone());
        Ok(p)
    }

    /// `Π_{m+1} = Π_m⊗1 − N (S_{m−1}/S_m) A A*` with `A = (Π_m⊗1)(1^{⊗(m−1)}⊗t)`.
    fn wenzl_step(&self, pm: &CMat, m: usize) -> Result<CMat> {
        let big = self.big_n();
        let dm = big.pow(m as u32);
        let lower = big.pow(m as u32 - 1);
        let tm = linalg::unvec(self.t.col_as_slice(0), big, big);
        // A[(b, j), a] = Σ_i Π_m[b, a·N + i] T[i, j]
        let mut a = linalg::zeros(dm * big, lower);
        for col in 0..lower {
            for b in 0..dm {
                for j in 0..big {
                    let mut s = ZERO;
                    for i in 0..big {
                        s += pm[(b, col * big + i)] * tm[(i, j)];
                    }
                    a[(b * big + j, col)] = s;
                }
            }
        }
        let coef = big as f64 * spectral::chebyshev_real(m - 1, big as f64)
            / spectral::chebyshev_real(m, big as f64);
        let mut next = linalg::kron(pm, &linalg::eye(big));
        let a = &a;
        faer::linalg::matmul::matmul(
            next.as_mut(),
            faer::Accum::Add,
            a.as_ref(),
            a.adjoint(),
            c(-coef),
            faer::Par::Seq,
        );
        let cleaned = eigen_cleanup(&next)?;
        let rank = cleaned.1;
        let expected = self.dim(m + 1);
        if rank != expected {
            return Err(FqgError::Rank { what: format!("Π_{}", m + 1), got: rank, expected });
        }
        Ok(cleaned.0)
    }

    /// Orthonormal basis `B_n` of `H_n`, built recursively as the orthogonal
    /// complement of the single surviving cup inside `H_{n−1} ⊗ ℂ^N`.
    pub fn basis(&self, n: usize) -> Result<Arc<CMat>> {
        self.check_level(n)?;
        if let Some(b) = self.memo.lock().unwrap().bases.get(&n) {
            return Ok(b.clone());
        }
        let b = if n <= 1 {
            Arc::new(linalg::eye(self.big_n().pow(n as u32)))
        } else {
            let b1 = self.basis(n - 1)?;
            let b2 = self.basis(n - 2)?;
            self.load_or(Kind::Basis, [n, 0, 0], || Ok(self.basis_step(&b1, &b2)))?
        };
        self.memo.lock().unwrap().bases.insert(n, b.clone());
        Ok(b)
    }

    fn basis_step(&self, bn: &CMat, bprev: &CMat) -> CMat {
        let big = self.big_n();
        let dn = bn.ncols();
        let dp = bprev.ncols();
        let rows_prev = bprev.nrows();
        let tm = linalg::unvec(self.t.col_as_slice(0), big, big);
        // Y[(α, j), c] = Σ_i G_i[α, c] T[i, j],  G_i = B_n[(·, i), :]^* B_{n−1}
        let mut y = linalg::zeros(dn * big, dp);
        for i in 0..big {
            let sub = Mat::from_fn(rows_prev, dn, |a, al| bn[(a * big + i, al)]);
            let g = linalg::mhm(&sub, bprev);
            for j in 0..big {
                let w = tm[(i, j)];
                if w == ZERO {
                    continue;
                }
                for col in 0..dp {
                    for al in 0..dn {
                        y[(al * big + j, col)] += g[(al, col)] * w;
                    }
                }
            }
        }
        let q2 = linalg::orth_complement(&y);
        let dnext = q2.ncols();
        let rows = bn.nrows();
        let mut out = linalg::zeros(rows * big, dnext);
        for j in 0..big {
            let qj = Mat::from_fn(dn, dnext, |al, col| q2[(al * big + j, col)]);
            let part = linalg::mm(bn.as_ref(), qj.as_ref());
            for col in 0..dnext {
                for a in 0..rows {
                    out[(a * big + j, col)] = part[(a, col)];
                }
            }
        }
        for col in 0..dnext {
            linalg::fix_column_phase(&mut out, col);
        }
        out
    }

    /// Nested cups `t_r` reshaped as an `N^r × N^r` matrix (row = first `r` strands).
    pub fn nested_cup(&self, r: usize) -> CMat {
        nested_cup(&self.t, self.big_n(), r)
    }

    /// Fusion isometry `V_l^{n,k} : H_l → H_n ⊗ H_k`.
    pub fn fusion_isometry(&self, n: usize, k: usize, l: usize) -> Result<Arc<CMat>> {
        if !spectral::in_fusion(n, k, l) {
            return Err(FqgError::NotInFusion { n, k, l });
        }
        self.check_level(n.max(k).max(l))?;
        if let Some(v) = self.memo.lock().unwrap().fusions.get(&(n, k, l)) {
            return Ok(v.clone());
        }
        let v = self.load_or(Kind::Fusion, [n, k, l], || self.build_fusion(n, k, l))?;
        self.memo.lock().unwrap().fusions.insert((n, k, l), v.clone());
        Ok(v)
    }

    /// Uncompressed candidate `(B_n ⊗ B_k)^* Ins_r(B_l)` (a multiple of `V_l^{n,k}`).
    pub fn fusion_candidate(&self, n: usize, k: usize, l: usize) -> Result<CMat> {
        let big = self.big_n();
        let r = (n + k - l) / 2;
        let bn = self.basis(n)?;
        let bk = self.basis(k)?;
        let bl = self.basis(l)?;
        let tr = self.nested_cup(r);
        let (na, nb, nr) = (big.pow((n - r) as u32), big.pow((k - r) as u32), big.pow(r as u32));
        Ok(insertion_candidate(&bn, &bk, &bl, &tr, (na, nb, nr)))
    }

    fn build_fusion(&self, n: usize, k: usize, l: usize) -> Result<CMat> {
        let m = self.fusion_candidate(n, k, l)?;
        let what = format!("V_{l}^({n},{k})");
        let (mut v, _) = linalg::polar_isometry(&m, POLAR_TOL, &what).map_err(|e| match e {
            FqgError::Invariant { value, .. } if !value.is_finite() || value > 0.5 => {
                FqgError::Rank { what: what.clone(), got: 0, expected: self.dim(l) }
            }
            other => other,
        })?;
        fix_global_phase(&mut v);
        Ok(v)
    }

    /// Matrix `J_n` of the antilinear conjugation `j_n(ξ) = J_n conj(ξ)` on `H_n`.
    pub fn conjugation(&self, n: usize) -> Result<Arc<CMat>> {
        self.check_level(n)?;
        if let Some(j) = self.memo.lock().unwrap().conjugations.get(&n) {
            return Ok(j.clone());
        }
        let j = self.load_or(Kind::Conjugation, [n, 0, 0], || self.build_conjugation(n))?;
        self.memo.lock().unwrap().conjugations.insert(n, j.clone());
        Ok(j)
    }

    fn build_conjugation(&self, n: usize) -> Result<CMat> {
        let big = self.big_n();
        let b = self.basis(n)?;
        let w = apply_each_strand(self.params.f(), &linalg::conj(&b), big, n);
        let w = reverse_strands(&w, big, n);
        let m = linalg::mm(b.adjoint(), w.as_ref());
        let (j, _) = linalg::polar_isometry(&m, POLAR_TOL, &format!("J_{n}"))?;
        Ok(j)
    }

    /// Post-construction checks for `Π_n`.
    pub fn validate_jw(&self, n: usize) -> Result<JwReport> {
        let p = self.jw_projection(n)?;
        let big = self.big_n();
        let herm = linalg::frob(&linalg::sub(&p, &linalg::adjoint(&p)));
        let idem = linalg::frob(&linalg::sub(&linalg::mm(&*p, &*p), &p));
        // a Hermitian Π with ‖Π² − Π‖_F = δ < 1/4 has every eigenvalue within 2δ of 0 or 1,
        // so its rank is the rounded trace
        let rank = if herm <= JW_TOL && idem <= JW_TOL {
            linalg::trace(&p).re.round() as usize
        } else {
            linalg::herm_eigvals(&p)?.iter().filter(|&&v| v >= 0.5).count()
        };
        let mut cup = 0.0f64;
        for i in 0..n.saturating_sub(1) {
            let ins = cup_insertion(&self.t, big, n, i);
            cup = cup.max(linalg::frob(&linalg::mm(&*p, &ins)));
        }
        let basis_gap = if n <= self.max_level {
            let b = self.basis(n)?;
            linalg::frob(&linalg::sub(&linalg::mm(&*b, b.adjoint()), &p))
        } else {
            f64::NAN
        };
        let expected_rank = self.dim(n);
        let pass = herm <= JW_TOL && idem <= JW_TOL && cup <= JW_TOL && rank == expected_rank && basis_gap <= JW_TOL;
        Ok(JwReport { n, hermitian_defect: herm, idempotent_defect: idem, rank, expected_rank, cup_defect: cup, basis_gap, pass })
    }

    /// `‖Σ_l V_l V_l^* − I‖_op` on `H_n ⊗ H_k`.
    pub fn completeness_defect(&self, n: usize, k: usize) -> Result<f64> {
        let d = self.dim(n) * self.dim(k);
        let mut s = linalg::zeros(d, d);
        for l in spectral::fusion_range(n, k) {
            let v = self.fusion_isometry(n, k, l)?;
            faer::linalg::matmul::matmul(s.as_mut(), faer::Accum::Add, v.as_ref(), v.adjoint(), ONE, faer::Par::Seq);
        }
        let e = linalg::sub(&s, &linalg::eye(d));
        let ev = linalg::herm_eigvals(&e)?;
        Ok(ev.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JwReport {
    pub n: usize,
    pub hermitian_defect: f64,
    pub idempotent_defect: f64,
    pub rank: usize,
    pub expected_rank: usize,
    pub cup_defect: f64,
    /// `‖B_n B_n^* − Π_n‖_F`, comparing the two independent constructions.
    pub basis_gap: f64,
    pub pass: bool,
}

/// `t_F` for the given parameters, as an `N² × 1` matrix.
/// Nested cups `t_r` built from the cup `t`, reshaped as an `N^r × N^r` matrix
/// (row = first `r` strands).
pub fn nested_cup(t: &CMat, big: usize, r: usize) -> CMat {
    let tm = linalg::unvec(t.col_as_slice(0), big, big);
    let mut cur = Mat::from_fn(1, 1, |_, _| ONE);
    for _ in 0..r {
        let p = cur.nrows();
        // t_s[(a, i), (j, b)] = t_{s−1}[a, b] T[i, j]
        cur = Mat::from_fn(p * big, p * big, |row, col| {
            let (a, i) = (row / big, row % big);
            let (j, b) = (col / p, col % p);
            cur[(a, b)] * tm[(i, j)]
        });
    }
    cur
}

/// `(B_n ⊗ B_k)^* (ξ ↦ ξ with t_r inserted between strands na and nb)` applied to every
/// column ξ of `bl`, where `bl` lives on `ℂ^{na} ⊗ ℂ^{nb}` and `bn`, `bk` on
/// `ℂ^{na} ⊗ ℂ^{nr}` and `ℂ^{nr} ⊗ ℂ^{nb}`.
pub fn insertion_candidate(bn: &CMat, bk: &CMat, bl: &CMat, tr: &CMat, dims: (usize, usize, usize)) -> CMat {
    let (na, nb, nr) = dims;
    let (dk, dl) = (bk.ncols(), bl.ncols());
    // G[b, (u, j)] = Σ_v T_r[u, v] conj(B_k[(v, b), j])
    let g = Mat::from_fn(nb, nr * dk, |b, uj| {
        let (u, j) = (uj / dk, uj % dk);
        (0..nr).map(|v| tr[(u, v)] * bk[(v * nb + b, j)].conj()).sum::<C64>()
    });
    // X[(col, a), b] = Ξ_col[a, b]
    let x = Mat::from_fn(dl * na, nb, |ca, b| bl[((ca % na) * nb + b, ca / na)]);
    let z = linalg::mm(&x, &g);
    let rsh = Mat::from_fn(na * nr, dk * dl, |au, jc| {
        let (a, u) = (au / nr, au % nr);
        let (j, col) = (jc % dk, jc / dk);
        z[(col * na + a, u * dk + j)]
    });
    drop(z);
    let t = linalg::mm(bn.adjoint(), &rsh);
    linalg::unrows_first(&t, dk)
}

pub fn invariant_vector(params: &QGParams) -> CMat {
    let n = params.n();
    let f = params.f();
    let s = 1.0 / (n as f64).sqrt();
    Mat::from_fn(n * n, 1, |idx, _| {
        let (i, j) = (idx / n, idx % n);
        f[(j, i)] * s
    })
}

/// `id^{⊗i} ⊗ t ⊗ id^{⊗(n−2−i)}` as an explicit `N^n × N^{n−2}` matrix.
pub fn cup_insertion(t: &CMat, big: usize, n: usize, i: usize) -> CMat {
    let left = big.pow(i as u32);
    let right = big.pow((n - 2 - i) as u32);
    let mut m = linalg::zeros(big.pow(n as u32), left * right);
    for a in 0..left {
        for b in 0..right {
            for p in 0..big * big {
                m[(((a * big * big) + p) * right + b, a * right + b)] = t[(p, 0)];
            }
        }
    }
    m
}

/// Projection onto the span of eigenvectors with eigenvalue above 1/2; returns the rank.
pub fn eigen_cleanup(a: &CMat) -> Result<(CMat, usize)> {
    let (vals, vecs) = linalg::herm_eig(a)?;
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    let u = Mat::from_fn(a.nrows(), keep.len(), |r, cc| vecs[(r, keep[cc])]);
    Ok((linalg::mm(u.as_ref(), u.adjoint()), keep.len()))
}

/// `F^{⊗n}` applied to every column of `v` (rows indexed by `(ℂ^N)^{⊗n}`).
pub fn apply_each_strand(f: &CMat, v: &CMat, big: usize, n: usize) -> CMat {
    let mut cur = v.clone();
    for s in 0..n {
        let right = big.pow((n - 1 - s) as u32);
        let left = big.pow(s as u32);
        let mut next = linalg::zeros(cur.nrows(), cur.ncols());
        for col in 0..cur.ncols() {
            let src = cur.col_as_slice(col);
            let dst = next.col_as_slice_mut(col);
            for a in 0..left {
                for ip in 0..big {
                    for b in 0..right {
                        let mut acc = ZERO;
                        for i in 0..big {
                            acc += f[(ip, i)] * src[(a * big + i) * right + b];
                        }
                        dst[(a * big + ip) * right + b] = acc;
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Reverses the order of the `n` tensor strands of every column.
pub fn reverse_strands(v: &CMat, big: usize, n: usize) -> CMat {
    let perm: Vec<usize> = (0..v.nrows())
        .map(|mut idx| {
            let mut out = 0;
            for _ in 0..n {
                out = out * big + idx % big;
                idx /= big;
            }
            out
        })
        .collect();
    Mat::from_fn(v.nrows(), v.ncols(), |r, cc| v[(perm[r], cc)])
}

/// Multiplies the whole matrix by a unimodular scalar so that the first entry of
/// largest modulus in column 0 is real positive.
pub fn fix_global_phase(v: &mut CMat) {
    if v.ncols() == 0 {
        return;
    }
    let col = v.col_as_slice(0);
    let m = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return;
    }
    let idx = col.iter().position(|z| z.norm() >= m * (1.0 - 1e-10)).unwrap();
    let ph: C64 = col[idx].conj() / col[idx].norm();
    for j in 0..v.ncols() {
        for z in v.col_as_slice_mut(j) {
            *z *= ph;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(n: usize) -> Category {
        Category::new(QGParams::identity(n).unwrap(), 5)
    }

    // column-by-column construction of the fusion candidate
    fn candidate_by_columns(cat: &Category, n: usize, k: usize, l: usize) -> CMat {
        let big = cat.big_n();
        let r = (n + k - l) / 2;
        let (bn, bk, bl) = (cat.basis(n).unwrap(), cat.basis(k).unwrap(), cat.basis(l).unwrap());
        let bkc = linalg::conj(&bk);
        let tr = cat.nested_cup(r);
        let (na, nb, nr) = (big.pow((n - r) as u32), big.pow((k - r) as u32), big.pow(r as u32));
        let dk = bk.ncols();
        let mut m = linalg::zeros(bn.ncols() * dk, bl.ncols());
        for col in 0..bl.ncols() {
            let xi = bl.col_as_slice(col);
            let cm = Mat::from_fn(na * nr, nr * nb, |row, cc| {
                let (a, u) = (row / nr, row % nr);
                let (v, b) = (cc / nb, cc % nb);
                xi[a * nb + b] * tr[(u, v)]
            });
            let q = linalg::mm(&linalg::mm(bn.adjoint(), &cm), &bkc);
            linalg::vec_into(&q, m.col_as_slice_mut(col));
        }
        m
    }

    #[test]
    fn batched_candidate_matches_columnwise() {
        let cat = cat(3);
        for (n, k, l) in [(1, 1, 0), (1, 1, 2), (2, 1, 1), (2, 2, 2), (1, 2, 3), (3, 2, 1)] {
            let a = cat.fusion_candidate(n, k, l).unwrap();
            let b = candidate_by_columns(&cat, n, k, l);
            assert!(linalg::frob(&linalg::sub(&a, &b)) < 1e-12, "({n},{k},{l})");
        }
    }

    #[test]
    fn zigzag_signs() {
        let c3 = cat(3);
        let z = c3.zigzag();
        assert!(linalg::frob(&linalg::sub(&z, &linalg::scale(&linalg::eye(3), c(1.0 / 3.0)))) < 1e-12);
        let c4 = Category::new(QGParams::symplectic(4).unwrap(), 3);
        let z = c4.zigzag();
        assert!(linalg::frob(&linalg::sub(&z, &linalg::scale(&linalg::eye(4), c(-0.25)))) < 1e-12);
    }

    #[test]
    fn pi2_is_one_cup_complement() {
        let c3 = cat(3);
        let p = c3.jw_projection(2).unwrap();
        let t = c3.invariant_vector();
        let expect = linalg::sub(&linalg::eye(9), &linalg::mm(t.as_ref(), t.adjoint()));
        assert!(linalg::frob(&linalg::sub(&p, &expect)) < 1e-12);
    }

    #[test]
    fn v0_11_is_t() {
        let c3 = cat(3);
        let v = c3.fusion_isometry(1, 1, 0).unwrap();
        assert!(linalg::frob(&linalg::sub(&v, c3.invariant_vector())) < 1e-12);
    }

    #[test]
    fn reverse_is_involutive() {
        let v = Mat::from_fn(27, 2, |r, cc| c((r * 2 + cc) as f64));
        let w = reverse_strands(&reverse_strands(&v, 3, 3), 3, 3);
        assert_eq!(linalg::frob(&linalg::sub(&v, &w)), 0.0);
        let e = reverse_strands(&v, 3, 3);
        // index 1 = (0,0,1) ↦ (1,0,0) = 9
        assert_eq!(e[(9, 0)], v[(1, 0)]);
    }
}
