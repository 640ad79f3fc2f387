//! Conjugation-by-generators averaging map and the iteration towards the Haar state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{self, BlockElement};
use crate::error::{self, FqgError, Result};
use crate::intertwiners::Category;
use crate::linalg::{self, c, C64, CMat, ZERO};
use crate::spectral;

/// `w_ij = e_{ji}/N` at level 1, indexed `[i·N + j]`.
pub fn generators(cat: &Category) -> Vec<BlockElement> {
    let n = cat.big_n();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(BlockElement::matrix_unit(1, j, i, cat).scale(c(1.0 / n as f64)));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorSums {
    /// `‖Σ w ⋆ w♯ − N p_0‖_1`.
    pub left_defect: f64,
    /// `‖Σ w♯ ⋆ w − N p_0‖_1`.
    pub right_defect: f64,
}

pub fn generator_sums(cat: &Category) -> Result<GeneratorSums> {
    let target = BlockElement::unit().scale(c(cat.big_n() as f64));
    let (mut l, mut r) = (BlockElement::zero(), BlockElement::zero());
    for w in generators(cat) {
        let ws = algebra::sharp(&w, cat)?;
        l = l.add(&algebra::convolve(&w, &ws, cat)?);
        r = r.add(&algebra::convolve(&ws, &w, cat)?);
    }
    Ok(GeneratorSums {
        left_defect: algebra::lq_norm(&l.sub(&target), 1.0, cat)?,
        right_defect: algebra::lq_norm(&r.sub(&target), 1.0, cat)?,
    })
}

/// Fails unless both generator sums equal `N·p_0` within `tol`.
pub fn check_generator_sums(cat: &Category, tol: f64) -> Result<GeneratorSums> {
    let g = generator_sums(cat)?;
    error::check("Σ w ⋆ w♯ = N·p_0", g.left_defect, tol)?;
    error::check("Σ w♯ ⋆ w = N·p_0", g.right_defect, tol)?;
    Ok(g)
}

/// `Φ(x) = (1/2N) Σ_ij (w_ij ⋆ x ⋆ w_ij♯ + w_ij♯ ⋆ x ⋆ w_ij)` by direct convolution.
pub fn phi(x: &BlockElement, cat: &Category) -> Result<BlockElement> {
    if let Some(top) = x.top_level() {
        if top + 2 > cat.max_level() {
            return Err(FqgError::LevelBudget { level: top + 2, max: cat.max_level() });
        }
    }
    let mut acc = BlockElement::zero();
    for w in generators(cat) {
        let ws = algebra::sharp(&w, cat)?;
        let a = algebra::convolve(&algebra::convolve(&w, x, cat)?, &ws, cat)?;
        let b = algebra::convolve(&algebra::convolve(&ws, x, cat)?, &w, cat)?;
        acc = acc.add(&a).add(&b);
    }
    Ok(acc.scale(c(1.0 / (2 * cat.big_n()) as f64)))
}

/// One Kraus term `x_n ↦ coef · M x_n M^*` into block `m`.
#[derive(Clone, Debug)]
struct Term {
    n: usize,
    m: usize,
    coef: f64,
    mat: CMat,
}

/// Kraus form of `Φ` restricted to sources `n ≤ top` and targets `m ≤ cap`
/// (targets above `cap` are dropped). With `K ξ = Σ_j e_j ⊗ ξ ⊗ J e_j` and
/// `K' ξ = Σ_j J e_j ⊗ ξ ⊗ e_j`,
/// `Φ(x)_m = (d_n / 2N d_m) Σ_l (M_l x M_l^* + M'_l x M'_l^*)` with
/// `M_l = V_m^{l,1*} (V_l^{1,n*} ⊗ 1) K`.
pub struct KrausPhi {
    pub top: usize,
    pub cap: usize,
    terms: Vec<Term>,
    dims: Vec<usize>,
}

impl KrausPhi {
    pub fn new(cat: &Category, top: usize, cap: usize) -> Result<Self> {
        if top + 1 > cat.max_level() || cap > cat.max_level() {
            return Err(FqgError::LevelBudget { level: (top + 1).max(cap), max: cat.max_level() });
        }
        let big = cat.big_n();
        let j1 = cat.conjugation(1)?;
        let mut terms = Vec::new();
        for n in 0..=top {
            let dn = cat.dim(n);
            // K and K' as (N·dn·N) × dn matrices
            let mut kl = linalg::zeros(big * dn * big, dn);
            let mut kr = linalg::zeros(big * dn * big, dn);
            for a in 0..dn {
                for j in 0..big {
                    for k in 0..big {
                        kl[((j * dn + a) * big + k, a)] += j1[(k, j)];
                        kr[((k * dn + a) * big + j, a)] += j1[(k, j)];
                    }
                }
            }
            for l in spectral::fusion_range(1, n) {
                let vl = cat.fusion_isometry(1, n, l)?;
                let vla = linalg::adjoint(&vl);
                let eye = linalg::eye(big);
                let left = linalg::apply_kron(&vla, &eye, &kl);
                let right = linalg::apply_kron(&vla, &eye, &kr);
                for m in spectral::fusion_range(l, 1) {
                    if m > cap {
                        continue;
                    }
                    let vm = cat.fusion_isometry(l, 1, m)?;
                    let coef = dn as f64 / (2 * big * cat.dim(m)) as f64;
                    terms.push(Term { n, m, coef, mat: linalg::mhm(&vm, &left) });
                    terms.push(Term { n, m, coef, mat: linalg::mhm(&vm, &right) });
                }
            }
        }
        let dims = (0..=cap.max(top)).map(|n| cat.dim(n)).collect();
        Ok(Self { top, cap, terms, dims })
    }

    /// Levels of `x` above `top` are an error; output levels above `cap` are dropped.
    pub fn apply(&self, x: &BlockElement) -> Result<BlockElement> {
        if let Some(t) = x.top_level() {
            if t > self.top {
                return Err(FqgError::LevelBudget { level: t, max: self.top });
            }
        }
        let mut out: Vec<Option<CMat>> = vec![None; self.cap + 1];
        for t in &self.terms {
            if let Some(xn) = x.block(t.n) {
                let y = linalg::scale(&linalg::mm(&linalg::mm(&t.mat, xn), t.mat.adjoint()), c(t.coef));
                let slot = &mut out[t.m];
                *slot = Some(match slot.take() {
                    None => y,
                    Some(acc) => linalg::add(&acc, &y),
                });
            }
        }
        Ok(BlockElement::from_blocks(out.into_iter().enumerate().filter_map(|(m, b)| b.map(|b| (m, b)))))
    }

    /// Offsets of levels `1..=k` in the `L_{2,0}` coordinate vector.
    fn l20_offsets(&self, k: usize) -> Vec<usize> {
        let mut off = vec![0; k + 2];
        for n in 1..=k {
            off[n + 1] = off[n] + self.dims[n] * self.dims[n];
        }
        off
    }

    /// `T` or `T^*` on `⊕_{1≤n≤k} B(H_n)` in `L_2` coordinates `√d_n x_n`, compressed to the same levels.
    fn apply_l20(&self, v: &[C64], k: usize, adjoint: bool) -> Vec<C64> {
        let off = self.l20_offsets(k);
        let block = |v: &[C64], n: usize| {
            let d = self.dims[n];
            faer::Mat::from_fn(d, d, |a, b| v[off[n] + b * d + a])
        };
        let mut out = vec![ZERO; off[k + 1]];
        for t in &self.terms {
            if t.n == 0 || t.m == 0 || t.n > k || t.m > k {
                continue;
            }
            // in L_2 coordinates the coefficient becomes √(d_n/d_m)/2N = coef·√(d_m/d_n)
            let kappa = c(t.coef * (self.dims[t.m] as f64 / self.dims[t.n] as f64).sqrt());
            let (src, dst) = if adjoint { (t.m, t.n) } else { (t.n, t.m) };
            let u = block(v, src);
            let y = if adjoint {
                linalg::mm(&linalg::mhm(&t.mat, &u), &t.mat)
            } else {
                linalg::mm(&linalg::mm(&t.mat, &u), t.mat.adjoint())
            };
            let d = self.dims[dst];
            for b in 0..d {
                for a in 0..d {
                    out[off[dst] + b * d + a] += kappa * y[(a, b)];
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct L20Norm {
    pub big_n: usize,
    pub k: usize,
    pub norm: f64,
    pub ritz: Vec<f64>,
    /// Norm of the coupling from levels `K−1, K` into the dropped level `K+1`.
    pub boundary_coupling: f64,
    pub dim: usize,
}

pub const MEMORY_BUDGET_MB: u64 = 2048;

/// Rough peak memory of building the bases up to level `l`: the largest recursive step
/// holds `B_l`, `B_{l−1} ⊗ I` and a full `Q` factor of the ambient space.
pub fn basis_memory_mb(l: usize, big_n: usize) -> u64 {
    let amb = (big_n as f64).powi(l as i32);
    let bytes = 16.0 * (amb * spectral::chebyshev_real(l, big_n as f64) + 2.0 * amb * amb.min(1e9));
    (bytes / 1048576.0).ceil() as u64
}

/// `‖Φ‖` on `L_{2,0}` compressed to levels `1..=K`, by Lanczos on `T^*T`.
pub fn phi_l20_norm(k: usize, cat: &Category) -> Result<L20Norm> {
    if k == 0 {
        return Err(FqgError::Domain("compression needs K ≥ 1".into()));
    }
    let need = basis_memory_mb(k + 1, cat.big_n());
    if need > MEMORY_BUDGET_MB {
        return Err(FqgError::MemoryBudget {
            what: format!("level-{} intertwiners at N = {}", k + 1, cat.big_n()),
            needed_mb: need,
            limit_mb: MEMORY_BUDGET_MB,
        });
    }
    let kp = KrausPhi::new(cat, k, k + 1)?;
    let dim = kp.l20_offsets(k)[k + 1];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED ^ k as u64);
    let start: Vec<C64> = (0..dim).map(|_| C64::new(rand::Rng::gen::<f64>(&mut rng) - 0.5, 0.0)).collect();
    let (top, ritz) = linalg::lanczos_max(dim, 80.min(dim), &start, |v| {
        let w = kp.apply_l20(v, k, false);
        Ok(kp.apply_l20(&w, k, true))
    })?;
    // coupling into level K+1 from the two highest kept levels
    let mut boundary = 0.0f64;
    for t in kp.terms.iter().filter(|t| t.m == k + 1 && t.n >= 1) {
        let s = linalg::op_norm(&t.mat)?;
        boundary = boundary.max(t.coef * (cat.dim(t.m) as f64 / cat.dim(t.n) as f64).sqrt() * s * s);
    }
    Ok(L20Norm { big_n: cat.big_n(), k, norm: top.max(0.0).sqrt(), ritz, boundary_coupling: boundary, dim })
}

/// `C(q, N) = C_N^{2(1−1/q)}`.
pub fn interpolated_bound(q: f64, c_n: f64) -> Result<f64> {
    if !(c_n > 0.0 && c_n < 1.0) {
        return Err(FqgError::Domain(format!("interpolation needs 0 < C_N < 1, got {c_n}")));
    }
    if !(q > 1.0 && q <= 2.0) {
        return Err(FqgError::Domain(format!("interpolation needs 1 < q ≤ 2, got {q}")));
    }
    Ok(c_n.powf(2.0 * (1.0 - 1.0 / q)))
}

/// `max ‖Φ(x)‖_1/‖x‖_1` over random elements on levels `≤ top` (half Hermitian).
pub fn phi_l1_check(trials: usize, top: usize, seed: u64, cat: &Category) -> Result<f64> {
    let kp = KrausPhi::new(cat, top, top + 2)?;
    let mut worst = 0.0f64;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let levels: Vec<usize> = (0..=top).collect();
        let x = if t % 2 == 0 {
            BlockElement::random_hermitian(&mut rng, &levels, cat)
        } else {
            BlockElement::random(&mut rng, &levels, cat)
        };
        let y = kp.apply(&x)?;
        worst = worst.max(algebra::lq_norm(&y, 1.0, cat)? / algebra::lq_norm(&x, 1.0, cat)?);
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiIterationTrace {
    pub p: f64,
    pub q: f64,
    pub x0: C64,
    pub start_level: usize,
    /// `‖z_k‖_q`, `k = 0..=k_max`.
    pub norms: Vec<f64>,
    /// `D_N (n(x) + 2k + 1)^{1+1/p} ‖z_k‖_q`.
    pub upper_bounds: Vec<f64>,
    /// Highest non-zero level of `z_k`.
    pub support: Vec<usize>,
    /// First `k` whose iterate was computed with targets above `cap` dropped.
    pub compressed_from: Option<usize>,
    pub cap: usize,
    /// Least-squares geometric ratio of `‖z_k‖` over `k ≥ 3`.
    pub rate: f64,
    pub strictly_decreasing_from_3: bool,
    pub d_n: f64,
}

/// Iterates `z_k = Φ^k(x) − x_0 p_0`; blocks above `cap` are dropped once the exact
/// support would exceed it.
pub fn iterate_to_haar(
    x: &BlockElement,
    p: f64,
    k_max: usize,
    cap: usize,
    d_n: f64,
    cat: &Category,
) -> Result<PhiIterationTrace> {
    if !(p >= 2.0) {
        return Err(FqgError::Domain(format!("iteration bound needs p ≥ 2, got {p}")));
    }
    let q = crate::harmonic::conjugate_exponent(p);
    let n0 = x.top_level().unwrap_or(0);
    if n0 > cap {
        return Err(FqgError::LevelBudget { level: n0, max: cap });
    }
    let kp = KrausPhi::new(cat, cap, cap)?;
    let x0 = x.scalar_part();
    let mut z = x.sub(&BlockElement::unit().scale(x0));
    let mut norms = Vec::new();
    let mut support = Vec::new();
    let mut compressed_from = None;
    for k in 0..=k_max {
        if k > 0 {
            if compressed_from.is_none() && n0 + 2 * k > cap {
                compressed_from = Some(k);
            }
            // Φ fixes p_0 and preserves the level-0 coefficient, so z stays in L_{2,0}
            z = kp.apply(&z)?;
            let s = z.scalar_part();
            z = z.sub(&BlockElement::unit().scale(s));
        }
        norms.push(algebra::lq_norm(&z, q, cat)?);
        support.push(z.top_level().unwrap_or(0));
    }
    let upper_bounds = norms
        .iter()
        .enumerate()
        .map(|(k, v)| d_n * ((n0 + 2 * k + 1) as f64).powf(1.0 + 1.0 / p) * v)
        .collect();
    let tail: Vec<(f64, f64)> = norms.iter().enumerate().skip(3).filter(|(_, v)| **v > 0.0).map(|(k, v)| (k as f64, v.ln())).collect();
    let rate = if tail.len() >= 2 {
        let m = tail.len() as f64;
        let mx = tail.iter().map(|t| t.0).sum::<f64>() / m;
        let my = tail.iter().map(|t| t.1).sum::<f64>() / m;
        let sxy: f64 = tail.iter().map(|t| (t.0 - mx) * (t.1 - my)).sum();
        let sxx: f64 = tail.iter().map(|t| (t.0 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    } else {
        0.0
    };
    let strictly = norms.windows(2).skip(3).all(|w| w[1] < w[0]);
    Ok(PhiIterationTrace {
        p,
        q,
        x0,
        start_level: n0,
        norms,
        upper_bounds,
        support,
        compressed_from,
        cap,
        rate,
        strictly_decreasing_from_3: strictly,
        d_n,
    })
}
