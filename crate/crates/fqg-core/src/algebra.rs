//! The convolution algebra `C_c(𝔽O_F)`: finitely supported block elements, the
//! Haar trace, `L_q` norms, convolution, antipode and involution, central
//! families and the regular representation on a truncation.

use std::collections::BTreeMap;

use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FqgError, Result};
use crate::intertwiners::Category;
use crate::linalg::{self, c, C64, CMat, ONE, ZERO};
use crate::spectral;

/// Finitely supported element `x = (x_n)` with `x_n ∈ B(H_n)` in `B_n` coordinates.
/// Zero blocks are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockElement {
    blocks: BTreeMap<usize, CMat>,
}

impl BlockElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `p_n`, the identity of `B(H_n)`.
    pub fn p(n: usize, cat: &Category) -> Self {
        Self::from_block(n, linalg::eye(cat.dim(n)))
    }

    pub fn unit() -> Self {
        Self::from_block(0, linalg::eye(1))
    }

    /// Matrix unit `e_ij` at level `n`.
    pub fn matrix_unit(n: usize, i: usize, j: usize, cat: &Category) -> Self {
        let d = cat.dim(n);
        let mut m = linalg::zeros(d, d);
        m[(i, j)] = ONE;
        Self::from_block(n, m)
    }

    pub fn from_block(n: usize, m: CMat) -> Self {
        let mut x = Self::zero();
        x.insert(n, m);
        x
    }

    pub fn from_blocks(it: impl IntoIterator<Item = (usize, CMat)>) -> Self {
        let mut x = Self::zero();
        for (n, m) in it {
            x.insert(n, m);
        }
        x
    }

    /// Replaces block `n`; an all-zero block removes the level.
    pub fn insert(&mut self, n: usize, m: CMat) {
        if linalg::max_abs(&m) == 0.0 {
            self.blocks.remove(&n);
        } else {
            self.blocks.insert(n, m);
        }
    }

    fn accumulate(&mut self, n: usize, m: &CMat) {
        match self.blocks.get_mut(&n) {
            Some(b) => *b += m,
            None => {
                self.blocks.insert(n, m.clone());
            }
        }
    }

    fn canonicalize(mut self) -> Self {
        self.blocks.retain(|_, m| linalg::max_abs(m) != 0.0);
        self
    }

    pub fn block(&self, n: usize) -> Option<&CMat> {
        self.blocks.get(&n)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &CMat)> {
        self.blocks.iter().map(|(&n, m)| (n, m))
    }

    pub fn levels(&self) -> Vec<usize> {
        self.blocks.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `n(x)`, the largest supported level.
    pub fn top_level(&self) -> Option<usize> {
        self.blocks.keys().next_back().cloned()
    }

    /// Level-0 scalar, `⟨ω_x, p_0⟩`.
    pub fn scalar_part(&self) -> C64 {
        self.block(0).map(|m| m[(0, 0)]).unwrap_or(ZERO)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_blocks(self.blocks().map(|(n, m)| (n, linalg::scale(m, s))))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, m) in other.blocks() {
            out.accumulate(n, m);
        }
        out.canonicalize()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(c(-1.0)))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_blocks(self.blocks().map(|(n, m)| (n, linalg::adjoint(m))))
    }

    /// Pointwise (blockwise) product in `C_c`.
    pub fn mul(&self, other: &Self) -> Self {
        Self::from_blocks(
            self.blocks()
                .filter_map(|(n, a)| other.block(n).map(|b| (n, linalg::mm(a, b)))),
        )
    }

    /// Restriction to levels `≤ k`.
    pub fn truncate(&self, k: usize) -> Self {
        Self::from_blocks(self.blocks().filter(|(n, _)| *n <= k).map(|(n, m)| (n, m.clone())))
    }

    pub fn without_level(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.blocks.remove(&n);
        out
    }

    /// Standard complex Gaussian blocks at the given levels.
    pub fn random<R: Rng>(rng: &mut R, levels: &[usize], cat: &Category) -> Self {
        Self::from_blocks(levels.iter().map(|&n| {
            let d = cat.dim(n);
            (n, linalg::random_gaussian(rng, d, d))
        }))
    }

    pub fn random_hermitian<R: Rng>(rng: &mut R, levels: &[usize], cat: &Category) -> Self {
        Self::from_blocks(levels.iter().map(|&n| (n, linalg::random_hermitian(rng, cat.dim(n)))))
    }

    fn check_dims(&self, cat: &Category) -> Result<()> {
        for (n, m) in self.blocks() {
            let d = cat.dim(n);
            if m.nrows() != d || m.ncols() != d {
                return Err(FqgError::Shape(format!(
                    "block at level {n} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(())
    }
}

/// `h(x) = Σ_n d_n Tr(x_n)`.
pub fn haar(x: &BlockElement, cat: &Category) -> C64 {
    x.blocks().map(|(n, m)| linalg::trace(m) * cat.dim(n) as f64).sum()
}

/// `‖x‖_q = (Σ_n d_n Σ_i σ_i(x_n)^q)^{1/q}`; `q = ∞` is the largest block operator norm.
pub fn lq_norm(x: &BlockElement, q: f64, cat: &Category) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(FqgError::Domain(format!("L_q norm needs q ≥ 1, got {q}")));
    }
    let mut svs = Vec::new();
    for (n, m) in x.blocks() {
        svs.push((cat.dim(n) as f64, linalg::singular_values(m)?));
    }
    let smax = svs.iter().flat_map(|(_, s)| s.iter().cloned()).fold(0.0, f64::max);
    if q.is_infinite() || smax == 0.0 {
        return Ok(smax);
    }
    let total: f64 = svs
        .iter()
        .map(|(d, s)| d * s.iter().map(|v| (v / smax).powf(q)).sum::<f64>())
        .sum();
    Ok(smax * total.powf(1.0 / q))
}

/// `(d_n d_k / d_l) V^*(x ⊗ y) V` for `V = V_l^{n,k}`.
pub fn convolve_block(
    xn: &CMat,
    yk: &CMat,
    n: usize,
    k: usize,
    l: usize,
    cat: &Category,
) -> Result<CMat> {
    let v = cat.fusion_isometry(n, k, l)?;
    let xyv = linalg::apply_kron(xn, yk, &v);
    let coef = (cat.dim(n) * cat.dim(k)) as f64 / cat.dim(l) as f64;
    let mut out = linalg::mhm(&v, &xyv);
    for j in 0..out.ncols() {
        for z in out.col_as_slice_mut(j) {
            *z *= coef;
        }
    }
    Ok(out)
}

/// `x ⋆ y`; fails (never truncates) when a fusion product exceeds the level budget.
pub fn convolve(x: &BlockElement, y: &BlockElement, cat: &Category) -> Result<BlockElement> {
    if let (Some(a), Some(b)) = (x.top_level(), y.top_level()) {
        if a + b > cat.max_level() {
            return Err(FqgError::LevelBudget { level: a + b, max: cat.max_level() });
        }
    }
    convolve_window(x, y, usize::MAX, cat)
}

/// `P_{≤w}(x ⋆ y)`: only output levels `≤ w` are formed. This is an explicit
/// projection used by adjoint/compression routines, not a silent truncation.
pub fn convolve_window(
    x: &BlockElement,
    y: &BlockElement,
    w: usize,
    cat: &Category,
) -> Result<BlockElement> {
    x.check_dims(cat)?;
    y.check_dims(cat)?;
    let mut out = BlockElement::zero();
    for (n, xn) in x.blocks() {
        for (k, yk) in y.blocks() {
            for l in spectral::fusion_range(n, k) {
                if l > w {
                    continue;
                }
                let b = convolve_block(xn, yk, n, k, l, cat)?;
                out.accumulate(l, &b);
            }
        }
    }
    Ok(out.canonicalize())
}

/// Independent oracle for `h(a·(x⋆y))`: `Σ d_n d_k Tr((V a_l V^*)(x_n ⊗ y_k))`
/// with the coproduct block formed and the Kronecker product materialized.
pub fn convolve_oracle_pairing(
    x: &BlockElement,
    y: &BlockElement,
    a: &BlockElement,
    cat: &Category,
) -> Result<C64> {
    let mut s = ZERO;
    for (n, xn) in x.blocks() {
        for (k, yk) in y.blocks() {
            let xy = linalg::kron(xn, yk);
            for (l, al) in a.blocks() {
                if !spectral::in_fusion(n, k, l) {
                    continue;
                }
                let v = cat.fusion_isometry(n, k, l)?;
                let delta = linalg::mm(&linalg::mm(&*v, al), v.adjoint());
                s += linalg::trace_prod(&delta, &xy) * (cat.dim(n) * cat.dim(k)) as f64;
            }
        }
    }
    Ok(s)
}

/// `S(x)_n = J_n x_nᵀ J_n^*`.
pub fn antipode(x: &BlockElement, cat: &Category) -> Result<BlockElement> {
    let mut out = BlockElement::zero();
    for (n, m) in x.blocks() {
        let j = cat.conjugation(n)?;
        out.insert(n, linalg::mm(&linalg::mm(&*j, m.transpose()), j.adjoint()));
    }
    Ok(out)
}

/// `x^♯ = S(x^*)`, i.e. `J_n conj(x_n) J_n^*`.
pub fn sharp(x: &BlockElement, cat: &Category) -> Result<BlockElement> {
    let mut out = BlockElement::zero();
    for (n, m) in x.blocks() {
        let j = cat.conjugation(n)?;
        out.insert(n, linalg::mm(&linalg::mm(&*j, m.conjugate()), j.adjoint()));
    }
    Ok(out)
}

/// `φ^λ_{Λ(x),Λ(y)} = (ι ⊗ h)(Δ(y^*)(1 ⊗ x))`, blockwise.
pub fn regular_coefficient(x: &BlockElement, y: &BlockElement, cat: &Category) -> Result<BlockElement> {
    let mut out = BlockElement::zero();
    for (l, yl) in y.blocks() {
        let a = linalg::adjoint(yl);
        for (k, xk) in x.blocks() {
            let xc = linalg::conj(xk);
            for n in spectral::fusion_range(l, k) {
                if n > cat.max_level() {
                    return Err(FqgError::LevelBudget { level: n, max: cat.max_level() });
                }
                let (dn, dk) = (cat.dim(n), cat.dim(k));
                let v = cat.fusion_isometry(n, k, l)?;
                let p = linalg::mm(&*v, &a);
                // Tr_2[P V^* (1 ⊗ x)] = Σ_c P_c (V_c conj(x))^*, with P_c, V_c the d_n × d_k reshapes
                let mut acc = linalg::zeros(dn, dn);
                for col in 0..v.ncols() {
                    let pc = linalg::unvec(p.col_as_slice(col), dn, dk);
                    let vc = linalg::unvec(v.col_as_slice(col), dn, dk);
                    let rc = linalg::mm(&vc, &xc);
                    faer::linalg::matmul::matmul(
                        acc.as_mut(),
                        faer::Accum::Add,
                        &pc,
                        rc.adjoint(),
                        ONE,
                        faer::Par::Seq,
                    );
                }
                out.accumulate(n, &linalg::scale(&acc, c(dk as f64)));
            }
        }
    }
    Ok(out.canonicalize())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CentralKind {
    /// `φ_r = Σ S_n(rN)/S_n(N) p_n`.
    PoissonLike { r: f64 },
    /// `r^ℓ = Σ r^n p_n`.
    Semigroup { r: f64 },
    /// `(1+ℓ)^{−1−2/p}`.
    LengthWeight { p: f64 },
}

/// Central element `Σ_{n ≤ n_max} c_n p_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentralElement {
    pub kind: Option<CentralKind>,
    pub profile: Vec<f64>,
    /// `ln |c_n|`, kept separately so that long closed-form profiles do not underflow.
    #[serde(skip)]
    pub log_abs: Vec<f64>,
}

impl CentralElement {
    pub fn new(kind: CentralKind, big_n: usize, n_max: usize) -> Self {
        let log_abs = closed_form_log_table(kind, big_n, n_max);
        let nf = big_n as f64;
        let mut sign = vec![1.0; n_max + 1];
        if let CentralKind::PoissonLike { r } = kind {
            if r * nf < 2.0 {
                let (mut a, mut b) = (1.0f64, r * nf);
                for (n, s) in sign.iter_mut().enumerate().skip(1) {
                    *s = b.signum();
                    if n < n_max {
                        (a, b) = (b, r * nf * b - a);
                    }
                }
            }
        }
        let profile = log_abs.iter().zip(&sign).map(|(l, s)| s * l.exp()).collect();
        Self { kind: Some(kind), profile, log_abs }
    }

    pub fn from_profile(profile: Vec<f64>) -> Self {
        let log_abs = profile.iter().map(|v| v.abs().ln()).collect();
        Self { kind: None, profile, log_abs }
    }

    pub fn n_max(&self) -> usize {
        self.profile.len() - 1
    }

    /// Pointwise product with another central profile (same truncation).
    pub fn times(&self, other: &CentralElement) -> CentralElement {
        let profile = self.profile.iter().zip(&other.profile).map(|(a, b)| a * b).collect();
        let log_abs = self.log_abs.iter().zip(&other.log_abs).map(|(a, b)| a + b).collect();
        CentralElement { kind: None, profile, log_abs }
    }

    pub fn to_block(&self, cat: &Category, upto: usize) -> BlockElement {
        BlockElement::from_blocks(
            self.profile
                .iter()
                .enumerate()
                .take(upto + 1)
                .map(|(n, &v)| (n, linalg::scale(&linalg::eye(cat.dim(n)), c(v)))),
        )
    }

    pub fn log_abs_coeff(&self, n: usize) -> f64 {
        self.log_abs[n]
    }

    /// `[ln ‖p_n φ‖_p^p = ln(|c_n|^p d_n²)]_n`, overflow-free.
    pub fn log_block_pnorm_p(&self, p: f64, big_n: usize) -> Vec<f64> {
        let ld = spectral::chebyshev_log_table(self.n_max(), big_n as f64);
        self.log_abs.iter().zip(&ld).map(|(c, d)| p * c + 2.0 * d).collect()
    }
}

fn closed_form_log_table(kind: CentralKind, big_n: usize, n_max: usize) -> Vec<f64> {
    let nf = big_n as f64;
    match kind {
        CentralKind::PoissonLike { r } => {
            let x = r * nf;
            let den = spectral::chebyshev_log_table(n_max, nf);
            let num: Vec<f64> = if x >= 2.0 {
                spectral::chebyshev_log_table(n_max, x)
            } else {
                // |S_n(x)| ≤ n + 1 for |x| < 2: the plain recursion is safe
                let (mut a, mut b) = (1.0f64, x);
                (0..=n_max)
                    .map(|n| match n {
                        0 => 0.0,
                        _ => {
                            let v = b.abs().ln();
                            (a, b) = (b, x * b - a);
                            v
                        }
                    })
                    .collect()
            };
            num.iter().zip(&den).map(|(a, b)| a - b).collect()
        }
        CentralKind::Semigroup { r } => (0..=n_max).map(|n| n as f64 * r.ln()).collect(),
        CentralKind::LengthWeight { p } => (0..=n_max).map(|n| (-1.0 - 2.0 / p) * (1.0 + n as f64).ln()).collect(),
    }
}

/// Empirical band `C₁ rⁿ ≤ S_n(rN)/S_n(N) ≤ C₂ rⁿ` over `n ≤ n_max`.
#[derive(Clone, Debug, Serialize)]
pub struct BandReport {
    pub r: f64,
    pub c1: f64,
    pub c2: f64,
    /// `(S_n(rN)/S_n(N))/rⁿ` for `n = 0..=n_max`.
    pub ratios: Vec<f64>,
}

pub fn poisson_band(r: f64, big_n: usize, n_max: usize) -> BandReport {
    let phi = CentralElement::new(CentralKind::PoissonLike { r }, big_n, n_max);
    let ratios: Vec<f64> = phi.profile.iter().enumerate().map(|(n, v)| v / r.powi(n as i32)).collect();
    let c1 = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let c2 = ratios.iter().cloned().fold(0.0, f64::max);
    BandReport { r, c1, c2, ratios }
}

/// Matrix of `y ↦ P_{≤K}(x ⋆ y)` on `⊕_{k≤K} B(H_k)` in `L_2`-orthonormal
/// coordinates (`√d_k · y_k[a, b]`).
#[derive(Clone, Debug)]
pub struct RegularRep {
    pub k_max: usize,
    pub n0: usize,
    /// Offsets of each level's coordinates.
    pub offsets: Vec<usize>,
    pub matrix: CMat,
}

impl RegularRep {
    /// Number of coordinates belonging to levels `≤ k`.
    pub fn window(&self, k: usize) -> usize {
        self.offsets[k + 1]
    }

    /// Operator norm of the columns with `k ≤ K − n₀`, whose images are not cut by the
    /// truncation: a certified lower bound for the reduced norm of `x`.
    pub fn certified_lower_bound(&self) -> Result<f64> {
        if self.n0 > self.k_max {
            return Ok(0.0);
        }
        let w = self.window(self.k_max - self.n0);
        linalg::op_norm(&self.matrix.get(.., ..w).to_owned())
    }
}

pub fn level_offsets(k_max: usize, cat: &Category) -> Vec<usize> {
    let mut off = vec![0];
    for k in 0..=k_max {
        let d = cat.dim(k);
        off.push(off[k] + d * d);
    }
    off
}

pub fn to_l2_coords(y: &BlockElement, k_max: usize, cat: &Category) -> Vec<C64> {
    let off = level_offsets(k_max, cat);
    let mut v = vec![ZERO; off[k_max + 1]];
    for (k, m) in y.blocks() {
        if k > k_max {
            continue;
        }
        let d = cat.dim(k);
        let s = (d as f64).sqrt();
        for b in 0..d {
            for a in 0..d {
                v[off[k] + b * d + a] = m[(a, b)] * s;
            }
        }
    }
    v
}

pub fn from_l2_coords(v: &[C64], k_max: usize, cat: &Category) -> BlockElement {
    let off = level_offsets(k_max, cat);
    BlockElement::from_blocks((0..=k_max).map(|k| {
        let d = cat.dim(k);
        let s = 1.0 / (d as f64).sqrt();
        (k, Mat::from_fn(d, d, |a, b| v[off[k] + b * d + a] * s))
    }))
}

pub fn truncated_regular_rep(x: &BlockElement, k_max: usize, cat: &Category) -> Result<RegularRep> {
    let n0 = x.top_level().unwrap_or(0);
    if k_max + n0 > cat.max_level() {
        return Err(FqgError::LevelBudget { level: k_max + n0, max: cat.max_level() });
    }
    let offsets = level_offsets(k_max, cat);
    let dim = offsets[k_max + 1];
    let mut matrix = linalg::zeros(dim, dim);
    for (n, xn) in x.blocks() {
        for k in 0..=k_max {
            let dk = cat.dim(k);
            for l in spectral::fusion_range(n, k) {
                if l > k_max {
                    continue;
                }
                let v = cat.fusion_isometry(n, k, l)?;
                let (dn, dl) = (cat.dim(n), cat.dim(l));
                let coef = (dn * dk) as f64 / dl as f64 * (dl as f64 / dk as f64).sqrt();
                // V^*(x ⊗ e_ab)V = V_a^* x V_b, V_a = rows (α, a) of V
                let rows: Vec<CMat> = (0..dk)
                    .map(|a| Mat::from_fn(dn, dl, |al, cc| v[(al * dk + a, cc)]))
                    .collect();
                let xv: Vec<CMat> = rows.iter().map(|vb| linalg::mm(xn, vb)).collect();
                for a in 0..dk {
                    for b in 0..dk {
                        let blk = linalg::mhm(&rows[a], &xv[b]);
                        let col = offsets[k] + b * dk + a;
                        for cc in 0..dl {
                            for rr in 0..dl {
                                matrix[(offsets[l] + cc * dl + rr, col)] += blk[(rr, cc)] * coef;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(RegularRep { k_max, n0, offsets, matrix })
}
