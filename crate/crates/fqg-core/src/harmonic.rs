//! Verifiers for the Schatten bilinear contraction, local and global rapid decay,
//! `C*_p` norm bounds, weak-`L_p` classification, positive-definiteness Gram
//! tests and the exotic-window construction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{self, BlockElement, CentralElement, CentralKind};
use crate::error::{FqgError, Result};
use crate::intertwiners::Category;
use crate::linalg::{self, c, C64, CMat, ONE, ZERO};
use crate::spectral;

/// Deterministic per-trial generator: independent ChaCha streams keyed by a cell code.
pub fn trial_rng(seed: u64, cell: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(cell.wrapping_mul(1 << 20).wrapping_add(trial));
    r
}

// ---------------------------------------------------------------------------
// Schatten contraction

/// `Σ_{ij} x_ij ⊗ y_ij` for `x ∈ B(ℂ^{dh} ⊗ ℂ^d)`, `y ∈ B(ℂ^d ⊗ ℂ^{dk})`.
pub fn partial_contraction(x: &CMat, y: &CMat, dh: usize, d: usize, dk: usize) -> CMat {
    faer::Mat::from_fn(dh * dk, dh * dk, |row, col| {
        let (h, kk) = (row / dk, row % dk);
        let (h2, kk2) = (col / dk, col % dk);
        let mut s = ZERO;
        for i in 0..d {
            for j in 0..d {
                s += x[(h * d + i, h2 * d + j)] * y[(i * dk + kk, j * dk + kk2)];
            }
        }
        s
    })
}

pub fn contraction_ratio(x: &CMat, y: &CMat, dims: (usize, usize, usize), q: f64) -> Result<f64> {
    let (dh, d, dk) = dims;
    let z = partial_contraction(x, y, dh, d, dk);
    Ok(linalg::schatten(&z, q)? / (linalg::schatten(x, q)? * linalg::schatten(y, q)?))
}

/// Maximum of `‖Φ(x⊗y)‖_q / (‖x‖_q ‖y‖_q)` over Gaussian trials.
pub fn schatten_contraction_trial(
    dims: (usize, usize, usize),
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(1.0..=2.0).contains(&q) {
        return Err(FqgError::Domain(format!("Schatten contraction is only claimed for 1 ≤ q ≤ 2, got {q}")));
    }
    let (dh, d, dk) = dims;
    if dh == 0 || d == 0 || dk == 0 {
        return Err(FqgError::Domain("dimensions must be positive".into()));
    }
    let mut best = 0.0f64;
    for t in 0..trials {
        let mut rng = trial_rng(seed, (dh * 100 + d * 10 + dk) as u64, t as u64);
        let x = linalg::random_gaussian(&mut rng, dh * d, dh * d);
        let y = linalg::random_gaussian(&mut rng, d * dk, d * dk);
        best = best.max(contraction_ratio(&x, &y, dims, q)?);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Local block inequality

/// Duality map `J_q(z) = U Σ^{q−1} W^*` (the norming direction of `z` in `S_q`);
/// `q = ∞` keeps only the top singular pair.
pub fn duality_map(z: &CMat, q: f64) -> Result<CMat> {
    if q == 2.0 {
        return Ok(z.clone());
    }
    let (u, s, w) = linalg::svd(z)?;
    let smax = s.first().cloned().unwrap_or(0.0);
    let mut out = linalg::zeros(z.nrows(), z.ncols());
    if smax == 0.0 {
        return Ok(out);
    }
    for (i, &sv) in s.iter().enumerate() {
        let wgt = if q.is_infinite() {
            if i == 0 { 1.0 } else { 0.0 }
        } else if sv <= 1e-14 * smax {
            0.0
        } else {
            (sv / smax).powf(q - 1.0)
        };
        if wgt == 0.0 {
            continue;
        }
        for col in 0..z.ncols() {
            let f = w[(col, i)].conj() * wgt;
            for row in 0..z.nrows() {
                out[(row, col)] += u[(row, i)] * f;
            }
        }
    }
    Ok(out)
}

pub fn conjugate_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// One fusion channel `(x, y) ↦ V^*(x ⊗ y)V` for an isometry `V : ℂ^{dl} → ℂ^{dn} ⊗ ℂ^{dk}`,
/// with the adjoints of its two partial linear maps.
pub struct Channel<'a> {
    pub v: &'a CMat,
    pub dn: usize,
    pub dk: usize,
}

impl Channel<'_> {
    pub fn apply(&self, x: &CMat, y: &CMat) -> CMat {
        linalg::mhm(self.v, &linalg::apply_kron(x, y, self.v))
    }

    /// Adjoint of `x ↦ V^*(x⊗y)V`: `Tr_2[V z V^* (1 ⊗ y^*)]`.
    pub fn adjoint_x(&self, z: &CMat, y: &CMat) -> CMat {
        let p = linalg::mm(self.v, z);
        let m = linalg::apply_second(y, self.v, self.dn);
        linalg::pair_trace_second(&p, &m, self.dn, self.dk)
    }

    /// Adjoint of `y ↦ V^*(x⊗y)V`: `Tr_1[V z V^* (x^* ⊗ 1)]`.
    pub fn adjoint_y(&self, z: &CMat, x: &CMat) -> CMat {
        let p = linalg::mm(self.v, z);
        let m = linalg::apply_first(x, self.v, self.dk);
        linalg::pair_trace_first(&p, &m, self.dn, self.dk)
    }

    /// Random start followed by alternating nonlinear power sweeps; returns the best
    /// unweighted Schatten ratio seen (a lower bound for the bilinear norm).
    pub fn maximize(&self, q: f64, rng: &mut ChaCha8Rng, sweeps: usize) -> Result<f64> {
        if q == 1.0 {
            return self.maximize_rank_one(rng, 4 * sweeps);
        }
        let qd = conjugate_exponent(q);
        let mut x = linalg::random_gaussian(rng, self.dn, self.dn);
        let mut y = linalg::random_gaussian(rng, self.dk, self.dk);
        let (mut nz, mut jz) = norm_and_dual(&self.apply(&x, &y), q)?;
        let mut best = nz / (schatten_fast(&x, q)? * schatten_fast(&y, q)?);
        for _ in 0..sweeps {
            let before = best;
            x = norm_and_dual(&self.adjoint_x(&jz, &y), qd)?.1;
            (nz, jz) = norm_and_dual(&self.apply(&x, &y), q)?;
            best = best.max(nz / (schatten_fast(&x, q)? * schatten_fast(&y, q)?));
            y = norm_and_dual(&self.adjoint_y(&jz, &x), qd)?.1;
            (nz, jz) = norm_and_dual(&self.apply(&x, &y), q)?;
            best = best.max(nz / (schatten_fast(&x, q)? * schatten_fast(&y, q)?));
            if best - before <= SWEEP_RTOL * best {
                break;
            }
        }
        Ok(best)
    }

    /// `q = 1`: the trace-norm unit balls are the convex hulls of rank-one matrices, so
    /// `x = ab^*`, `y = cd^*` suffice and the ratio is `‖V^*(a⊗c)‖·‖V^*(b⊗d)‖`; both factors
    /// are maximized over unit product vectors by alternating top-eigenvector steps.
    fn maximize_rank_one(&self, rng: &mut ChaCha8Rng, iters: usize) -> Result<f64> {
        let mut a = linalg::random_gaussian(rng, self.dn, 1);
        let mut cv = linalg::random_gaussian(rng, self.dk, 1);
        let value = |a: &CMat, cv: &CMat| {
            let w = linalg::mhm(self.v, &linalg::kron(a, cv));
            linalg::frob(&w) / (linalg::frob(a) * linalg::frob(cv))
        };
        let mut best = value(&a, &cv);
        for _ in 0..iters {
            let before = best;
            // (1 ⊗ c^*) V is dn × L; its top left singular vector maximizes over a
            let kc = linalg::apply_second(&linalg::adjoint(&cv), self.v, self.dn);
            a = top_eigvec(&linalg::mm(&kc, kc.adjoint()))?;
            let ka = linalg::apply_first(&linalg::adjoint(&a), self.v, self.dk);
            cv = top_eigvec(&linalg::mm(&ka, ka.adjoint()))?;
            best = best.max(value(&a, &cv));
            if best - before <= 1e-12 * best {
                break;
            }
        }
        Ok(best * best)
    }
}

fn top_eigvec(h: &CMat) -> Result<CMat> {
    let (_, u) = linalg::herm_eig(h)?;
    let k = u.ncols() - 1;
    Ok(faer::Mat::from_fn(u.nrows(), 1, |i, _| u[(i, k)]))
}

const SMALL_SIDE: usize = 48;

/// Schatten norm, via the Gram eigenvalues for large matrices (`q > 1` only, where the
/// `λ^{q/2}` map is Hölder-stable near zero).
pub fn schatten_fast(z: &CMat, q: f64) -> Result<f64> {
    let side = z.nrows().min(z.ncols());
    if q == 2.0 {
        return Ok(linalg::frob(z));
    }
    if side <= SMALL_SIDE || q <= 1.0 {
        return linalg::schatten(z, q);
    }
    let g = if z.nrows() <= z.ncols() { linalg::mm(z, z.adjoint()) } else { linalg::mhm(z, z) };
    let sv: Vec<f64> = linalg::herm_eigvals(&g)?.into_iter().map(|l| l.max(0.0).sqrt()).collect();
    Ok(linalg::schatten_from_sv(&sv, q))
}

/// Relative improvement below which a sweep counts as converged.
pub const SWEEP_RTOL: f64 = 1e-5;

/// `(‖z‖_q, J_q(z))` with `J_q(z) = U (Σ/σ_max)^{q−1} W^*`; large matrices go through
/// `z^*z = W Σ² W^*` so that `J = z W Σ^{q−2} W^*`.
pub fn norm_and_dual(z: &CMat, q: f64) -> Result<(f64, CMat)> {
    let small = z.nrows().min(z.ncols()) <= SMALL_SIDE;
    if q == 2.0 {
        return Ok((linalg::frob(z), z.clone()));
    }
    if small || q.is_infinite() || q <= 1.0 || z.ncols() > z.nrows() {
        return Ok((linalg::schatten(z, q)?, duality_map(z, q)?));
    }
    let (lam, w) = linalg::herm_eig(&linalg::mhm(z, z))?;
    let sv: Vec<f64> = lam.iter().map(|l| l.max(0.0).sqrt()).collect();
    let smax = sv.last().cloned().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok((0.0, linalg::zeros(z.nrows(), z.ncols())));
    }
    let wd = faer::Mat::from_fn(w.nrows(), w.ncols(), |i, j| {
        if sv[j] <= 1e-7 * smax {
            ZERO
        } else {
            w[(i, j)] * ((sv[j] / smax).powf(q - 2.0) / smax)
        }
    });
    Ok((linalg::schatten_from_sv(&sv, q), linalg::mm(&linalg::mm(z, &wd), w.adjoint())))
}

/// `(d_n d_k / d_l)^{1−1/q}`: converts the unweighted Schatten ratio of a channel
/// into the ratio of Haar-weighted `L_q` norms.
pub fn cell_weight(dn: usize, dk: usize, dl: usize, q: f64) -> f64 {
    ((dn * dk) as f64 / dl as f64).powf(1.0 - 1.0 / q)
}

#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    /// Best ratio over the first `T` trials.
    pub ratio_t: f64,
    /// Best ratio over all `2T` trials.
    pub ratio: f64,
    pub sweeps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RDReport {
    pub q: f64,
    pub grid: Vec<(usize, usize, usize)>,
    /// Cells with `n, k ≤ max_level` whose output level exceeds the category budget.
    pub excluded: Vec<(usize, usize, usize)>,
    pub cells: Vec<CellResult>,
    pub empirical_local_constant: f64,
    pub constant_at_t: f64,
    pub doubling_change: f64,
    pub trials: usize,
    pub seed: u64,
    pub bound: &'static str,
}

pub const DEFAULT_SWEEPS: usize = 12;
/// Cells whose output block exceeds this size get [`LARGE_CELL_SWEEPS`] refinement sweeps.
pub const LARGE_CELL: usize = 300;
pub const LARGE_CELL_SWEEPS: usize = 4;

pub fn sweeps_for(dl: usize) -> usize {
    if dl > LARGE_CELL {
        LARGE_CELL_SWEEPS
    } else {
        DEFAULT_SWEEPS
    }
}

/// Maximizes `‖p_l(x⋆y)‖_q / (‖x‖_q ‖y‖_q)` over every admissible cell, running
/// `2·trials` seeded starts per cell and reporting both the `T` and `2T` maxima.
pub fn local_rd_scan(q: f64, max_level: usize, trials: usize, seed: u64, cat: &Category) -> Result<RDReport> {
    if !(1.0..=2.0).contains(&q) {
        return Err(FqgError::Domain(format!("local scan needs 1 ≤ q ≤ 2, got {q}")));
    }
    let mut grid = Vec::new();
    let mut excluded = Vec::new();
    for n in 0..=max_level {
        for k in 0..=max_level {
            for l in spectral::fusion_range(n, k) {
                if l > cat.max_level() {
                    excluded.push((n, k, l));
                } else {
                    grid.push((n, k, l));
                }
            }
        }
    }
    let mut cells = Vec::new();
    for &(n, k, l) in &grid {
        let v = cat.fusion_isometry(n, k, l)?;
        let (dn, dk, dl) = (cat.dim(n), cat.dim(k), cat.dim(l));
        let ch = Channel { v: &v, dn, dk };
        let w = cell_weight(dn, dk, dl, q);
        let code = ((n * 64 + k) * 64 + l) as u64;
        let mut best_t = 0.0f64;
        let mut best = 0.0f64;
        for t in 0..2 * trials {
            let mut rng = trial_rng(seed, code, t as u64);
            let r = w * ch.maximize(q, &mut rng, sweeps_for(dl))?;
            if t < trials {
                best_t = best_t.max(r);
            }
            best = best.max(r);
        }
        cells.push(CellResult { n, k, l, ratio_t: best_t, ratio: best, sweeps: sweeps_for(dl) });
    }
    let d = cells.iter().map(|c| c.ratio).fold(0.0, f64::max);
    let dt = cells.iter().map(|c| c.ratio_t).fold(0.0, f64::max);
    Ok(RDReport {
        q,
        grid,
        excluded,
        cells,
        empirical_local_constant: d,
        constant_at_t: dt,
        doubling_change: (d - dt).abs() / dt,
        trials,
        seed,
        bound: "lower",
    })
}

// ---------------------------------------------------------------------------
// Global rapid decay

#[derive(Clone, Debug, Serialize)]
pub struct GlobalRD {
    pub n: usize,
    pub q: f64,
    pub k_trunc: usize,
    /// `max_trials ‖x⋆·‖_{q→q} / ((n+1)‖x‖_q)`, operator norm lower-bounded on the truncation.
    pub ratio: f64,
    pub method: &'static str,
    pub trials: usize,
    pub seed: u64,
    pub bound: &'static str,
}

fn l2_dim(k: usize, cat: &Category) -> usize {
    algebra::level_offsets(k, cat)[k + 1]
}

/// `‖L_x‖` on `⊕_{k ≤ K} L_2` blocks (images are not truncated), by dense SVD for small
/// domains and Lanczos on `L_x^* L_x = P_K L_{x♯} L_x` otherwise.
pub fn l2_operator_norm(x: &BlockElement, k_trunc: usize, cat: &Category) -> Result<(f64, &'static str)> {
    let dim = l2_dim(k_trunc, cat);
    let xs = algebra::sharp(x, cat)?;
    let gram = |v: &[C64]| -> Result<Vec<C64>> {
        let y = algebra::from_l2_coords(v, k_trunc, cat);
        let z = algebra::convolve(x, &y, cat)?;
        let w = algebra::convolve_window(&xs, &z, k_trunc, cat)?;
        Ok(algebra::to_l2_coords(&w, k_trunc, cat))
    };
    if dim <= 400 {
        let mut g = linalg::zeros(dim, dim);
        for j in 0..dim {
            let mut e = vec![ZERO; dim];
            e[j] = ONE;
            let col = gram(&e)?;
            g.col_as_slice_mut(j).copy_from_slice(&col);
        }
        let top = linalg::herm_eigvals(&g)?.last().cloned().unwrap_or(0.0);
        Ok((top.max(0.0).sqrt(), "exact"))
    } else {
        let start: Vec<C64> = (0..dim).map(|i| c(1.0 + ((i * 7919) % 13) as f64 / 13.0)).collect();
        let (top, _) = linalg::lanczos_max(dim, 40, &start, gram)?;
        Ok((top.max(0.0).sqrt(), "lanczos-lower"))
    }
}

/// Weighted duality map on block elements: `⊕ J_q(z_n)` (the `d_n` weights cancel).
fn block_duality(z: &BlockElement, q: f64, cat: &Category) -> Result<BlockElement> {
    if q.is_infinite() {
        // L_1 unit ball extreme point: top singular pair of the dominant block, scaled by 1/d_n
        let mut best: Option<(usize, f64)> = None;
        for (n, m) in z.blocks() {
            let s = linalg::op_norm(m)?;
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((n, s));
            }
        }
        return Ok(match best {
            None => BlockElement::zero(),
            Some((n, _)) => {
                let j = duality_map(z.block(n).unwrap(), f64::INFINITY)?;
                BlockElement::from_block(n, linalg::scale(&j, c(1.0 / cat.dim(n) as f64)))
            }
        });
    }
    Ok(BlockElement::from_blocks(
        z.blocks().map(|(n, m)| (n, duality_map(m, q).unwrap())),
    ))
}

/// Lower bound for `‖L_x‖_{q→q}` on the truncation by the nonlinear power method.
pub fn lq_operator_norm(x: &BlockElement, q: f64, k_trunc: usize, seed: u64, cat: &Category) -> Result<f64> {
    let qd = conjugate_exponent(q);
    let xs = algebra::sharp(x, cat)?;
    let mut rng = trial_rng(seed, 0xC0FFEE, k_trunc as u64);
    let levels: Vec<usize> = (0..=k_trunc).collect();
    let mut y = BlockElement::random(&mut rng, &levels, cat);
    let mut best = 0.0f64;
    for _ in 0..30 {
        let z = algebra::convolve(x, &y, cat)?;
        let r = algebra::lq_norm(&z, q, cat)? / algebra::lq_norm(&y, q, cat)?;
        if r <= best * (1.0 + 1e-10) {
            best = best.max(r);
            break;
        }
        best = r;
        let w = algebra::convolve_window(&xs, &block_duality(&z, q, cat)?, k_trunc, cat)?;
        y = block_duality(&w, qd, cat)?;
        if y.is_zero() {
            break;
        }
    }
    Ok(best)
}

pub fn global_rd_estimate(
    n: usize,
    q: f64,
    k_trunc: usize,
    trials: usize,
    seed: u64,
    cat: &Category,
) -> Result<GlobalRD> {
    if n + k_trunc > cat.max_level() {
        return Err(FqgError::LevelBudget { level: n + k_trunc, max: cat.max_level() });
    }
    let mut ratio = 0.0f64;
    let mut method = "exact";
    for t in 0..trials {
        let mut rng = trial_rng(seed, 0x6C0B + n as u64, t as u64);
        let x = BlockElement::random(&mut rng, &[n], cat);
        let (norm, m) = if q == 2.0 {
            l2_operator_norm(&x, k_trunc, cat)?
        } else {
            (lq_operator_norm(&x, q, k_trunc, seed ^ t as u64, cat)?, "power-lower")
        };
        method = m;
        ratio = ratio.max(norm / ((n + 1) as f64 * algebra::lq_norm(&x, q, cat)?));
    }
    Ok(GlobalRD { n, q, k_trunc, ratio, method, trials, seed, bound: "lower" })
}

// ---------------------------------------------------------------------------
// C*_p bounds

pub fn cstar_upper_bound(x: &BlockElement, p: f64, d_n: f64, cat: &Category) -> Result<f64> {
    let top = x
        .top_level()
        .ok_or_else(|| FqgError::Domain("upper bound of the zero element".into()))?;
    if !(p >= 2.0) {
        return Err(FqgError::Domain(format!("C*_p bound needs p ≥ 2, got {p}")));
    }
    let q = conjugate_exponent(p);
    Ok(d_n * ((top + 1) as f64).powf(1.0 + 1.0 / p) * algebra::lq_norm(x, q, cat)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerSequence {
    pub p: f64,
    pub q: f64,
    pub values: Vec<f64>,
    /// True when the requested `k_max` exceeded the level budget.
    pub truncated: bool,
    pub min_value: f64,
}

/// `a_k = ‖(x♯ ⋆ x)^{⋆2k}‖_q^{1/4k}`, exact convolution powers within the budget.
pub fn cstar_power_sequence(
    x: &BlockElement,
    p: f64,
    k_max: usize,
    level_budget: usize,
    cat: &Category,
) -> Result<PowerSequence> {
    let q = conjugate_exponent(p);
    let nx = x.top_level().unwrap_or(0);
    if level_budget > cat.max_level() {
        return Err(FqgError::LevelBudget { level: level_budget, max: cat.max_level() });
    }
    let reachable = if nx == 0 { k_max } else { level_budget / (4 * nx) };
    let kk = k_max.min(reachable);
    let z = algebra::convolve(&algebra::sharp(x, cat)?, x, cat)?;
    let mut values = Vec::new();
    let mut pow = BlockElement::unit();
    for k in 1..=kk {
        pow = algebra::convolve(&algebra::convolve(&pow, &z, cat)?, &z, cat)?;
        values.push(algebra::lq_norm(&pow, q, cat)?.powf(1.0 / (4 * k) as f64));
    }
    let min_value = values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PowerSequence { p, q, values, truncated: kk < k_max, min_value })
}

// ---------------------------------------------------------------------------
// Weak L_p classification

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    WeaklyLp,
    NotWeaklyLp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ItemFour {
    Holds,
    Fails,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakLpVerdict {
    pub p: f64,
    pub family: Option<CentralKind>,
    pub r: f64,
    /// Exponential decay rate `s` with `|φ_n| ≈ sⁿ` (analytic for closed forms).
    pub decay_rate: Option<f64>,
    /// `sup_n (n+1)^{−1} ‖p_n φ‖_p`; `∞` when the tail grows exponentially.
    pub item2_sup: f64,
    /// `‖(1+ℓ)^{−1−2/p} φ‖_p`; `∞` when the series diverges.
    pub item3_norm: f64,
    pub item4_all_r: ItemFour,
    pub verdict: Verdict,
    pub items_agree: bool,
    pub caveat: Option<String>,
}

/// `|φ_n|^{1/n}` limit for the closed-form families.
pub fn decay_rate(kind: CentralKind, big_n: usize) -> Option<f64> {
    let nf = big_n as f64;
    match kind {
        CentralKind::Semigroup { r } => Some(r),
        CentralKind::PoissonLike { r } => {
            let x = r * nf;
            if x > 2.0 {
                Some(spectral::rho(x) / spectral::rho(nf))
            } else {
                Some(1.0 / spectral::rho(nf))
            }
        }
        CentralKind::LengthWeight { .. } => Some(1.0),
    }
}

/// Growth model `ln P_n ≈ a + b·n + c·ln(n+1)` for the partial sums `P_n = Σ_{m≤n} t_m`,
/// fitted over the last half of the range. Partial sums are monotone, so sign
/// oscillations of the profile do not disturb the fit.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailFit {
    pub rate: f64,
    pub power: f64,
}

const RATE_TOL: f64 = 1e-4;
const POWER_TOL: f64 = 0.05;

pub fn tail_fit(log_terms: &[f64]) -> TailFit {
    let mut acc = f64::NEG_INFINITY;
    let partial: Vec<f64> = log_terms
        .iter()
        .map(|&t| {
            acc = spectral::log_add(acc, t);
            acc
        })
        .collect();
    let lo = partial.len() / 2;
    let pts: Vec<(f64, f64, f64)> = (lo..partial.len())
        .filter(|&i| partial[i].is_finite())
        .map(|i| (i as f64, ((i + 1) as f64).ln(), partial[i]))
        .collect();
    // normal equations for the basis (1, n, ln(n+1)), centered for conditioning
    let m = pts.len() as f64;
    let (mx, ml, my) = pts.iter().fold((0.0, 0.0, 0.0), |a, p| (a.0 + p.0 / m, a.1 + p.1 / m, a.2 + p.2 / m));
    let (mut sxx, mut sxl, mut sll, mut sxy, mut sly) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, l, y) in &pts {
        let (x, l, y) = (x - mx, l - ml, y - my);
        sxx += x * x;
        sxl += x * l;
        sll += l * l;
        sxy += x * y;
        sly += l * y;
    }
    let det = sxx * sll - sxl * sxl;
    TailFit { rate: (sxy * sll - sly * sxl) / det, power: (sxx * sly - sxl * sxy) / det }
}

/// Bounded terms ⇔ partial sums grow at most linearly.
pub(crate) fn sup_is_finite(f: TailFit) -> bool {
    f.rate <= RATE_TOL && f.power <= 1.0 + POWER_TOL
}

/// Convergent series ⇔ partial sums level off.
pub(crate) fn sum_is_finite(f: TailFit) -> bool {
    f.rate <= RATE_TOL && f.power <= POWER_TOL
}

/// Items (2)–(4) of the weak-`L_p` characterization for a central profile.
pub fn weak_lp_classify(phi: &CentralElement, p: f64, big_n: usize) -> Result<WeakLpVerdict> {
    weak_lp_classify_with(phi, p, big_n, 1)
}

/// Worker for [`weak_lp_classify`]; `stride = 2` keeps only the even lengths.
pub(crate) fn weak_lp_classify_with(phi: &CentralElement, p: f64, big_n: usize, stride: usize) -> Result<WeakLpVerdict> {
    if !(p >= 2.0) {
        return Err(FqgError::Domain(format!("weak L_p classification needs p ≥ 2, got {p}")));
    }
    let n_max = phi.n_max();
    if n_max < 50 {
        return Err(FqgError::Domain(format!("profile too short for tail analysis (n_max = {n_max})")));
    }
    // log of (n+1)^{-1}‖p_n φ‖_p and of the item-(3) summands
    let log_block: Vec<f64> = phi.log_block_pnorm_p(p, big_n).into_iter().map(|v| v / p).collect();
    let kept = || log_block.iter().enumerate().step_by(stride);
    let item2_terms: Vec<f64> = kept().map(|(n, v)| v - ((n + 1) as f64).ln()).collect();
    let item3_terms: Vec<f64> = kept().map(|(n, v)| p * v - (p + 2.0) * ((n + 1) as f64).ln()).collect();
    let fit2 = tail_fit(&item2_terms);
    let fit3 = tail_fit(&item3_terms);
    let item2_sup = if sup_is_finite(fit2) {
        item2_terms.iter().cloned().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max).exp()
    } else {
        f64::INFINITY
    };
    let item3_norm = if sum_is_finite(fit3) {
        let lse = item3_terms.iter().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, |a, &b| spectral::log_add(a, b));
        (lse / p).exp()
    } else {
        f64::INFINITY
    };
    let rate = phi.kind.and_then(|k| decay_rate(k, big_n));
    let th = spectral::threshold(p, big_n)?;
    let item4 = match (phi.kind, rate) {
        (Some(CentralKind::LengthWeight { .. }), _) | (None, _) | (_, None) => ItemFour::Unknown,
        (_, Some(s)) => {
            // r^ℓφ ∈ L_p for all r < 1 ⇔ (r s) < threshold for all r < 1 ⇔ s ≤ threshold
            if s <= th * (1.0 + 1e-12) {
                ItemFour::Holds
            } else {
                ItemFour::Fails
            }
        }
    };
    let v2 = item2_sup.is_finite();
    let v3 = item3_norm.is_finite();
    let (verdict, agree, caveat) = match item4 {
        ItemFour::Unknown => (
            if v2 && v3 { Verdict::WeaklyLp } else { Verdict::NotWeaklyLp },
            v2 == v3,
            Some("item (4) not decidable for this profile; verdict from items (2)/(3)".to_string()),
        ),
        i4 => {
            let v4 = i4 == ItemFour::Holds;
            (if v4 { Verdict::WeaklyLp } else { Verdict::NotWeaklyLp }, v2 == v4 && v3 == v4, None)
        }
    };
    let r = match phi.kind {
        Some(CentralKind::PoissonLike { r }) | Some(CentralKind::Semigroup { r }) => r,
        _ => f64::NAN,
    };
    Ok(WeakLpVerdict {
        p,
        family: phi.kind,
        r,
        decay_rate: rate,
        item2_sup,
        item3_norm,
        item4_all_r: item4,
        verdict,
        items_agree: agree,
        caveat,
    })
}

/// `φ_r` parameter whose decay rate equals `s` (needs `1/ρ(N) < s < 1`).
pub fn poisson_parameter_for_rate(s: f64, big_n: usize) -> Result<f64> {
    let rho_n = spectral::rho(big_n as f64);
    let rt = s * rho_n;
    if !(rt > 1.0 && s < 1.0) {
        return Err(FqgError::Domain(format!("no φ_r decays at rate {s} for N = {big_n}")));
    }
    Ok((rt + 1.0 / rt) / big_n as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExoticWindow {
    pub p: f64,
    pub p_prime: f64,
    pub big_n: usize,
    pub window: (f64, f64),
    pub r0: f64,
    /// Parameter of the `φ_r` whose decay rate is `r₀`.
    pub r_phi: f64,
    pub weakly_lp_prime: bool,
    pub weakly_lp: bool,
    pub split: bool,
    pub detail_p_prime: WeakLpVerdict,
    pub detail_p: WeakLpVerdict,
    /// Verdicts for `φ` evaluated literally at `r = r₀`, for comparison.
    pub literal_phi_r0: (Verdict, Verdict),
    /// Verdicts for the semigroup `r₀^ℓ`.
    pub semigroup_r0: (Verdict, Verdict),
    pub conclusion: String,
}

pub const WEAK_LP_N_MAX: usize = 4000;

pub fn exotic_window_demo(p: f64, p_prime: f64, big_n: usize) -> Result<ExoticWindow> {
    if !(p >= 2.0 && p_prime > p) {
        return Err(FqgError::Domain(format!("need 2 ≤ p < p', got ({p}, {p_prime})")));
    }
    let lo = spectral::threshold(p, big_n)?;
    let hi = spectral::threshold(p_prime, big_n)?;
    let r0 = 0.5 * (lo + hi);
    let r_phi = poisson_parameter_for_rate(r0, big_n)?;
    let phi = CentralElement::new(CentralKind::PoissonLike { r: r_phi }, big_n, WEAK_LP_N_MAX);
    let dp = weak_lp_classify(&phi, p_prime, big_n)?;
    let d = weak_lp_classify(&phi, p, big_n)?;
    let lit = CentralElement::new(CentralKind::PoissonLike { r: r0 }, big_n, WEAK_LP_N_MAX);
    let sg = CentralElement::new(CentralKind::Semigroup { r: r0 }, big_n, WEAK_LP_N_MAX);
    let literal_phi_r0 = (weak_lp_classify(&lit, p_prime, big_n)?.verdict, weak_lp_classify(&lit, p, big_n)?.verdict);
    let semigroup_r0 = (weak_lp_classify(&sg, p_prime, big_n)?.verdict, weak_lp_classify(&sg, p, big_n)?.verdict);
    let weakly_lp_prime = dp.verdict == Verdict::WeaklyLp;
    let weakly_lp = d.verdict == Verdict::WeaklyLp;
    let split = weakly_lp_prime && !weakly_lp;
    let conclusion = if split {
        format!("φ is weakly L_{p_prime} but not weakly L_{p}: the quotient C*_{p_prime} → C*_{p} is not injective")
    } else {
        "verdicts do not split; no conclusion".to_string()
    };
    Ok(ExoticWindow {
        p,
        p_prime,
        big_n,
        window: (lo, hi),
        r0,
        r_phi,
        weakly_lp_prime,
        weakly_lp,
        split,
        detail_p_prime: dp,
        detail_p: d,
        literal_phi_r0,
        semigroup_r0,
        conclusion,
    })
}

// ---------------------------------------------------------------------------
// Positive definiteness

#[derive(Clone, Debug, Serialize)]
pub struct GramTestReport {
    pub m: usize,
    pub min_eigenvalue: f64,
    pub norm: f64,
    pub tolerance: f64,
    pub hermitian_defect: f64,
    pub pass: bool,
}

pub const GRAM_REL_TOL: f64 = 1e-8;

/// `G_ij = h(φ · (x_j♯ ⋆ x_i))`; passes iff `λ_min(G) ≥ −tol·‖G‖`.
pub fn pd_gram_test(phi: &BlockElement, family: &[BlockElement], cat: &Category) -> Result<GramTestReport> {
    let m = family.len();
    let sharps: Vec<BlockElement> = family.iter().map(|x| algebra::sharp(x, cat)).collect::<Result<_>>()?;
    let mut g = linalg::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let cv = algebra::convolve(&sharps[j], &family[i], cat)?;
            g[(i, j)] = algebra::haar(&phi.mul(&cv), cat);
        }
    }
    let norm = linalg::op_norm(&g)?;
    let hermitian_defect = linalg::frob(&linalg::sub(&g, &linalg::adjoint(&g))) / norm.max(f64::MIN_POSITIVE);
    let ev = linalg::herm_eigvals(&g)?;
    let min_eigenvalue = ev.first().cloned().unwrap_or(0.0);
    let tolerance = GRAM_REL_TOL * norm;
    Ok(GramTestReport { m, min_eigenvalue, norm, tolerance, hermitian_defect, pass: min_eigenvalue >= -tolerance })
}
