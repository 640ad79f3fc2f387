//! The free unitary layer (`F = I_N`): words over `{u, ū}`, colored bases and
//! fusion isometries, word-block convolution, the local and global rapid-decay
//! scans and the even-word series.
//!
//! A word `g` of length `ℓ` is realized inside `(ℂ^N)^{⊗ℓ}`; both `u ⊗ ū` and
//! `ū ⊗ u` contain the invariant vector `t = N^{−1/2} Σ e_i ⊗ e_i`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{CentralElement, CentralKind};
use crate::error::{FqgError, Result};
use crate::harmonic::{self, cell_weight, sweeps_for, trial_rng, Channel, GlobalRD, WeakLpVerdict};
use crate::intertwiners::{self, cup_insertion, fix_global_phase};
use crate::linalg::{self, c, C64, CMat, ONE, ZERO};
use crate::spectral::{self, QGParams, SeriesReport};

pub const DEFAULT_MAX_WORD_LEN: usize = 4;
const POLAR_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    U,
    Ubar,
}

impl Letter {
    pub fn bar(self) -> Self {
        match self {
            Letter::U => Letter::Ubar,
            Letter::Ubar => Letter::U,
        }
    }
}

/// Element of the free monoid on `u, ū`. Ordered by length, then lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `ḡ`: reversed, every letter conjugated.
    pub fn bar(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.bar()).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        Word(self.0.iter().chain(&other.0).cloned().collect())
    }

    pub fn prefix(&self, n: usize) -> Self {
        Word(self.0[..n].to_vec())
    }

    pub fn suffix_from(&self, n: usize) -> Self {
        Word(self.0[n..].to_vec())
    }

    /// No two equal adjacent letters.
    pub fn is_alternating(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    /// Positions `i` where letters `i, i+1` form `uū` or `ūu`.
    pub fn junctions(&self) -> Vec<usize> {
        (0..self.len().saturating_sub(1)).filter(|&i| self.0[i + 1] == self.0[i].bar()).collect()
    }

    /// Lengths of the maximal alternating runs.
    pub fn alternating_runs(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut cur = 0;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 && *l == self.0[i - 1] {
                runs.push(cur);
                cur = 0;
            }
            cur += 1;
        }
        if cur > 0 {
            runs.push(cur);
        }
        runs
    }

    pub fn all_of_length(n: usize) -> Vec<Word> {
        (0..1usize << n)
            .map(|bits| {
                Word((0..n).map(|i| if bits >> (n - 1 - i) & 1 == 0 { Letter::U } else { Letter::Ubar }).collect())
            })
            .collect()
    }

    pub fn all_up_to(n: usize) -> Vec<Word> {
        (0..=n).flat_map(Word::all_of_length).collect()
    }

    /// `(u ū)^{n/2}` (and a trailing `u` for odd `n`).
    pub fn alternating(n: usize) -> Word {
        Word((0..n).map(|i| if i % 2 == 0 { Letter::U } else { Letter::Ubar }).collect())
    }

    /// Injective code used to key per-cell random streams.
    pub fn code(&self) -> u64 {
        self.0.iter().fold(1u64, |a, l| a << 1 | (*l == Letter::Ubar) as u64)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.len(), &self.0).cmp(&(other.len(), &other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("e");
        }
        for l in &self.0 {
            f.write_str(if *l == Letter::U { "u" } else { "U" })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = FqgError;

    /// `u` and `U` (= ū); `""` or `"e"` is the empty word.
    fn from_str(s: &str) -> Result<Self> {
        if s == "e" {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|ch| match ch {
                'u' => Ok(Letter::U),
                'U' => Ok(Letter::Ubar),
                other => Err(FqgError::Domain(format!("invalid letter {other:?} in word {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One summand `γ ⊂ g ⊗ h` with `g = g'τ`, `h = τ̄h'`, `γ = g'h'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WordFusion {
    pub gamma: Word,
    pub tau: Word,
    pub g_rest: Word,
    pub h_rest: Word,
}

/// All components of `g ⊗ h`, top component first.
pub fn fusion_decompose(g: &Word, h: &Word) -> Vec<WordFusion> {
    let mut out = Vec::new();
    for r in 0..=g.len().min(h.len()) {
        let tau = g.suffix_from(g.len() - r);
        if h.prefix(r) != tau.bar() {
            break;
        }
        let (g_rest, h_rest) = (g.prefix(g.len() - r), h.suffix_from(r));
        out.push(WordFusion { gamma: g_rest.concat(&h_rest), tau, g_rest, h_rest });
    }
    out
}

/// `dim H_g`, from `d_{g'} · N = Σ_{γ ⊂ g' ⊗ x} d_γ` along the prefixes of `g`.
pub fn dim_word(g: &Word, big_n: usize) -> Result<u128> {
    let overflow = || FqgError::DimOverflow { n: g.len(), big_n };
    // dims[k] = dim of the length-k prefix
    let mut dims: Vec<u128> = vec![1];
    for k in 0..g.len() {
        let pre = g.prefix(k);
        let x = g.prefix(k + 1).suffix_from(k);
        let mut total = dims[k].checked_mul(big_n as u128).ok_or_else(overflow)?;
        for f in fusion_decompose(&pre, &x).iter().skip(1) {
            // the lower summands are shorter prefixes of g
            total -= dims[f.gamma.len()];
        }
        dims.push(total);
    }
    Ok(dims[g.len()])
}

#[derive(Default)]
struct WordMemo {
    bases: HashMap<Word, Arc<CMat>>,
    isometries: HashMap<(Word, Word, Word), Arc<CMat>>,
}

/// Colored bases and isometries for `U_N^+`, memoized in memory.
pub struct WordCategory {
    big_n: usize,
    max_len: usize,
    t: CMat,
    memo: Mutex<WordMemo>,
}

impl fmt::Debug for WordCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WordCategory").field("N", &self.big_n).field("max_len", &self.max_len).finish()
    }
}

impl WordCategory {
    pub fn new(big_n: usize, max_len: usize) -> Result<Self> {
        if big_n < 2 {
            return Err(FqgError::InvalidParams(format!("the unitary layer needs N ≥ 2, got {big_n}")));
        }
        let t = intertwiners::invariant_vector(&QGParams::identity(big_n)?);
        Ok(Self { big_n, max_len, t, memo: Mutex::new(WordMemo::default()) })
    }

    pub fn big_n(&self) -> usize {
        self.big_n
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn dim(&self, g: &Word) -> usize {
        dim_word(g, self.big_n).expect("word dimension overflow") as usize
    }

    fn check_len(&self, g: &Word) -> Result<()> {
        if g.len() > self.max_len {
            return Err(FqgError::WordBudget { len: g.len(), max: self.max_len });
        }
        Ok(())
    }

    /// Orthonormal basis `B_g` of `H_g ⊂ (ℂ^N)^{⊗ℓ(g)}`. For `g = g₀x` it is
    /// `B_{g₀} ⊗ 1` when no cup fits at the last junction, and otherwise the
    /// complement there of the copy of `H_{g'}` (`g₀ = g'x̄`).
    pub fn basis(&self, g: &Word) -> Result<Arc<CMat>> {
        self.check_len(g)?;
        if let Some(b) = self.memo.lock().unwrap().bases.get(g) {
            return Ok(b.clone());
        }
        let big = self.big_n;
        let b = if g.len() <= 1 {
            linalg::eye(big.pow(g.len() as u32))
        } else {
            let g0 = g.prefix(g.len() - 1);
            let b0 = self.basis(&g0)?;
            let widened = linalg::kron(&b0, &linalg::eye(big));
            if g.letters()[g.len() - 1] == g.letters()[g.len() - 2] {
                widened
            } else {
                let gp = g.prefix(g.len() - 2);
                let bp = self.basis(&gp)?;
                let y = linalg::apply_first(&linalg::adjoint(&b0), &linalg::kron(&bp, &self.t), big);
                linalg::mm(&widened, &linalg::orth_complement(&y))
            }
        };
        let expected = self.dim(g);
        if b.ncols() != expected {
            return Err(FqgError::Rank { what: format!("B_{g}"), got: b.ncols(), expected });
        }
        let b = Arc::new(b);
        self.memo.lock().unwrap().bases.insert(g.clone(), b.clone());
        Ok(b)
    }

    /// Projection onto `H_g`, built directly: the kernel of the sum of the cup-image
    /// projectors at every junction of `g`, rank-certified against `dim_word`.
    pub fn colored_projection(&self, g: &Word) -> Result<CMat> {
        self.check_len(g)?;
        let big = self.big_n;
        let amb = big.pow(g.len() as u32);
        let mut q = linalg::zeros(amb, amb);
        for i in g.junctions() {
            let e = cup_insertion(&self.t, big, g.len(), i);
            q = linalg::add(&q, &linalg::mm(&e, e.adjoint()));
        }
        // kernel of q = complement of every cup image; the nonzero spectrum of a sum of
        // projections is bounded away from zero, so a fixed cut is safe
        let (vals, vecs) = linalg::herm_eig(&q)?;
        let keep: Vec<usize> = (0..amb).filter(|&i| vals[i] < 1e-8).collect();
        let u = Mat::from_fn(amb, keep.len(), |r, cc| vecs[(r, keep[cc])]);
        let (p, rank) = (linalg::mm(&u, u.adjoint()), keep.len());
        let expected = self.dim(g);
        if rank != expected {
            return Err(FqgError::Rank { what: format!("colored projection of {g}"), got: rank, expected });
        }
        Ok(p)
    }

    /// Isometry `V_γ^{g,h} : H_γ → H_g ⊗ H_h` in colored-basis coordinates.
    pub fn word_isometry(&self, gamma: &Word, g: &Word, h: &Word) -> Result<Arc<CMat>> {
        let key = (gamma.clone(), g.clone(), h.clone());
        if let Some(v) = self.memo.lock().unwrap().isometries.get(&key) {
            return Ok(v.clone());
        }
        let f = fusion_decompose(g, h)
            .into_iter()
            .find(|f| &f.gamma == gamma)
            .ok_or_else(|| FqgError::Domain(format!("{gamma} is not a component of {g} ⊗ {h}")))?;
        for w in [gamma, g, h] {
            self.check_len(w)?;
        }
        let big = self.big_n;
        let r = f.tau.len();
        let tr = intertwiners::nested_cup(&self.t, big, r);
        let dims = (big.pow(f.g_rest.len() as u32), big.pow(f.h_rest.len() as u32), big.pow(r as u32));
        let (bg, bh, bgam) = (self.basis(g)?, self.basis(h)?, self.basis(gamma)?);
        let m = intertwiners::insertion_candidate(&bg, &bh, &bgam, &tr, dims);
        let what = format!("V_{gamma}^({g},{h})");
        let (mut v, _) = linalg::polar_isometry(&m, POLAR_TOL, &what)?;
        fix_global_phase(&mut v);
        let v = Arc::new(v);
        self.memo.lock().unwrap().isometries.insert(key, v.clone());
        Ok(v)
    }

    /// `‖Σ_γ V_γ V_γ^* − I‖_F` on `H_g ⊗ H_h`.
    pub fn completeness_defect(&self, g: &Word, h: &Word) -> Result<f64> {
        let d = self.dim(g) * self.dim(h);
        let mut s = linalg::zeros(d, d);
        for f in fusion_decompose(g, h) {
            let v = self.word_isometry(&f.gamma, g, h)?;
            s = linalg::add(&s, &linalg::mm(&*v, v.adjoint()));
        }
        Ok(linalg::frob(&linalg::sub(&s, &linalg::eye(d))))
    }
}

// ---------------------------------------------------------------------------
// Word blocks

/// Finitely supported element `⊕_g x_g` with `x_g ∈ B(H_g)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordBlockElement {
    blocks: BTreeMap<Word, CMat>,
}

impl WordBlockElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self::from_block(Word::empty(), linalg::eye(1))
    }

    pub fn from_block(g: Word, m: CMat) -> Self {
        let mut x = Self::zero();
        x.blocks.insert(g, m);
        x
    }

    /// `p_n = Σ_{ℓ(g) = n} p_g`.
    pub fn p_len(n: usize, wc: &WordCategory) -> Self {
        let mut x = Self::zero();
        for g in Word::all_of_length(n) {
            let d = wc.dim(&g);
            x.blocks.insert(g, linalg::eye(d));
        }
        x
    }

    pub fn random<R: Rng>(rng: &mut R, words: &[Word], wc: &WordCategory) -> Self {
        let mut x = Self::zero();
        for g in words {
            let d = wc.dim(g);
            x.blocks.insert(g.clone(), linalg::random_gaussian(rng, d, d));
        }
        x
    }

    pub fn block(&self, g: &Word) -> Option<&CMat> {
        self.blocks.get(g)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&Word, &CMat)> {
        self.blocks.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn max_len(&self) -> Option<usize> {
        self.blocks.keys().map(Word::len).max()
    }

    pub fn accumulate(&mut self, g: &Word, m: &CMat) {
        match self.blocks.get_mut(g) {
            Some(b) => *b = linalg::add(b, m),
            None => {
                self.blocks.insert(g.clone(), m.clone());
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, m) in other.blocks() {
            out.accumulate(g, &linalg::scale(m, c(-1.0)));
        }
        out
    }

    /// Largest entry modulus over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(linalg::max_abs).fold(0.0, f64::max)
    }

    fn check_dims(&self, wc: &WordCategory) -> Result<()> {
        for (g, m) in self.blocks() {
            let d = wc.dim(g);
            if m.nrows() != d || m.ncols() != d {
                return Err(FqgError::Shape(format!("block at {g} is {}x{}, expected {d}x{d}", m.nrows(), m.ncols())));
            }
        }
        Ok(())
    }
}

/// `(Σ_g d_g ‖x_g‖_q^q)^{1/q}`.
pub fn word_lq_norm(x: &WordBlockElement, q: f64, wc: &WordCategory) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(FqgError::Domain(format!("L_q norm needs q ≥ 1, got {q}")));
    }
    let mut svs = Vec::new();
    for (g, m) in x.blocks() {
        svs.push((wc.dim(g) as f64, linalg::singular_values(m)?));
    }
    let smax = svs.iter().flat_map(|(_, s)| s.iter().cloned()).fold(0.0, f64::max);
    if q.is_infinite() || smax == 0.0 {
        return Ok(smax);
    }
    let total: f64 = svs.iter().map(|(d, s)| d * s.iter().map(|v| (v / smax).powf(q)).sum::<f64>()).sum();
    Ok(smax * total.powf(1.0 / q))
}

/// `p_γ(x ⋆ y) = Σ_{g,h} (d_g d_h / d_γ) V^*(x_g ⊗ y_h)V`; fails when some `γ` is
/// longer than the category budget.
pub fn word_convolve(x: &WordBlockElement, y: &WordBlockElement, wc: &WordCategory) -> Result<WordBlockElement> {
    word_convolve_window(x, y, usize::MAX, wc)
}

/// `x ⋆ y` keeping only components of length `≤ w`.
pub fn word_convolve_window(
    x: &WordBlockElement,
    y: &WordBlockElement,
    w: usize,
    wc: &WordCategory,
) -> Result<WordBlockElement> {
    x.check_dims(wc)?;
    y.check_dims(wc)?;
    let mut out = WordBlockElement::zero();
    for (g, xg) in x.blocks() {
        for (h, yh) in y.blocks() {
            for f in fusion_decompose(g, h) {
                if f.gamma.len() > w {
                    continue;
                }
                let v = wc.word_isometry(&f.gamma, g, h)?;
                let coef = (wc.dim(g) * wc.dim(h)) as f64 / wc.dim(&f.gamma) as f64;
                let b = linalg::scale(&linalg::mhm(&v, &linalg::apply_kron(xg, yh, &v)), c(coef));
                out.accumulate(&f.gamma, &b);
            }
        }
    }
    Ok(out)
}

/// Adjoint of `y ↦ x ⋆ y` for the inner product `Σ_g d_g Tr(a_g^* b_g)`, restricted
/// to outputs of length `≤ k`.
fn word_convolve_adjoint(x: &WordBlockElement, z: &WordBlockElement, k: usize, wc: &WordCategory) -> Result<WordBlockElement> {
    let mut out = WordBlockElement::zero();
    for (g, xg) in x.blocks() {
        for h in Word::all_up_to(k) {
            for f in fusion_decompose(g, &h) {
                let Some(zg) = z.block(&f.gamma) else { continue };
                let v = wc.word_isometry(&f.gamma, g, &h)?;
                let ch = Channel { v: &v, dn: wc.dim(g), dk: wc.dim(&h) };
                let b = linalg::scale(&ch.adjoint_y(zg, xg), c(wc.dim(g) as f64));
                out.accumulate(&h, &b);
            }
        }
    }
    Ok(out)
}

fn l2_layout(k: usize, wc: &WordCategory) -> Vec<(Word, usize)> {
    Word::all_up_to(k).into_iter().map(|g| {
        let d = wc.dim(&g);
        (g, d)
    }).collect()
}

fn to_l2(y: &WordBlockElement, layout: &[(Word, usize)]) -> Vec<C64> {
    let mut out = Vec::new();
    for (g, d) in layout {
        let s = (*d as f64).sqrt();
        match y.block(g) {
            Some(m) => {
                for j in 0..*d {
                    out.extend(m.col_as_slice(j).iter().map(|z| z * s));
                }
            }
            None => out.extend(std::iter::repeat(ZERO).take(d * d)),
        }
    }
    out
}

fn from_l2(v: &[C64], layout: &[(Word, usize)]) -> WordBlockElement {
    let mut out = WordBlockElement::zero();
    let mut off = 0;
    for (g, d) in layout {
        let s = 1.0 / (*d as f64).sqrt();
        let m = Mat::from_fn(*d, *d, |i, j| v[off + j * d + i] * s);
        off += d * d;
        out.blocks.insert(g.clone(), m);
    }
    out
}

// ---------------------------------------------------------------------------
// Rapid decay

#[derive(Clone, Debug, Serialize)]
pub struct WordCell {
    pub gamma: Word,
    pub g: Word,
    pub h: Word,
    pub ratio_t: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WordRDReport {
    pub q: f64,
    pub big_n: usize,
    pub max_len: usize,
    pub cells: Vec<WordCell>,
    /// Cells whose output word is longer than the category budget.
    pub excluded: Vec<(Word, Word, Word)>,
    pub empirical_local_constant: f64,
    pub constant_at_t: f64,
    pub doubling_change: f64,
    pub global: Vec<GlobalRD>,
    pub trials: usize,
    pub seed: u64,
    pub bound: &'static str,
}

/// Local per-`(γ, g, h)` maximization of `‖p_γ(x⋆y)‖_q / (‖x‖_q ‖y‖_q)` over words
/// of length `≤ max_len`, followed by the length-graded global ratios.
pub fn word_rd_scan(q: f64, max_len: usize, trials: usize, seed: u64, wc: &WordCategory) -> Result<WordRDReport> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(FqgError::Domain(format!("word scan needs 1 < q ≤ 2, got {q}")));
    }
    if max_len > DEFAULT_MAX_WORD_LEN {
        return Err(FqgError::WordBudget { len: max_len, max: DEFAULT_MAX_WORD_LEN });
    }
    let words = Word::all_up_to(max_len);
    let mut cells = Vec::new();
    let mut excluded = Vec::new();
    for g in &words {
        for h in &words {
            for f in fusion_decompose(g, h) {
                if f.gamma.len() > wc.max_len() {
                    excluded.push((f.gamma, g.clone(), h.clone()));
                    continue;
                }
                let v = wc.word_isometry(&f.gamma, g, h)?;
                let (dg, dh, dl) = (wc.dim(g), wc.dim(h), wc.dim(&f.gamma));
                let ch = Channel { v: &v, dn: dg, dk: dh };
                let w = cell_weight(dg, dh, dl, q);
                let code = (g.code() << 24) ^ (h.code() << 12) ^ f.gamma.code();
                let (mut best_t, mut best) = (0.0f64, 0.0f64);
                for t in 0..2 * trials {
                    let mut rng = trial_rng(seed, code, t as u64);
                    let r = w * ch.maximize(q, &mut rng, sweeps_for(dl))?;
                    if t < trials {
                        best_t = best_t.max(r);
                    }
                    best = best.max(r);
                }
                cells.push(WordCell { gamma: f.gamma, g: g.clone(), h: h.clone(), ratio_t: best_t, ratio: best });
            }
        }
    }
    let d = cells.iter().map(|c| c.ratio).fold(0.0, f64::max);
    let dt = cells.iter().map(|c| c.ratio_t).fold(0.0, f64::max);
    let mut global = Vec::new();
    for n in 0..=max_len {
        let k = wc.max_len().saturating_sub(n).min(max_len);
        if n + k > wc.max_len() || k == 0 {
            continue;
        }
        global.push(word_global_rd(n, q, k, trials.max(1).min(3), seed, wc)?);
    }
    Ok(WordRDReport {
        q,
        big_n: wc.big_n(),
        max_len,
        cells,
        excluded,
        empirical_local_constant: d,
        constant_at_t: dt,
        doubling_change: (d - dt).abs() / dt,
        global,
        trials,
        seed,
        bound: "lower",
    })
}

/// `‖y ↦ x⋆y‖` on words of length `≤ k` (images untruncated), in `L_2`.
pub fn word_l2_operator_norm(x: &WordBlockElement, k: usize, wc: &WordCategory) -> Result<(f64, &'static str)> {
    let layout = l2_layout(k, wc);
    let dim: usize = layout.iter().map(|(_, d)| d * d).sum();
    let out_len = x.max_len().unwrap_or(0) + k;
    let gram = |v: &[C64]| -> Result<Vec<C64>> {
        let y = from_l2(v, &layout);
        let z = word_convolve_window(x, &y, out_len, wc)?;
        Ok(to_l2(&word_convolve_adjoint(x, &z, k, wc)?, &layout))
    };
    if dim <= 64 {
        let mut g = linalg::zeros(dim, dim);
        for j in 0..dim {
            let mut e = vec![ZERO; dim];
            e[j] = ONE;
            g.col_as_slice_mut(j).copy_from_slice(&gram(&e)?);
        }
        let top = linalg::herm_eigvals(&g)?.last().cloned().unwrap_or(0.0);
        Ok((top.max(0.0).sqrt(), "exact"))
    } else {
        let start: Vec<C64> = (0..dim).map(|i| c(1.0 + ((i * 7919) % 13) as f64 / 13.0)).collect();
        let (top, _) = linalg::lanczos_max(dim, 60, &start, gram)?;
        Ok((top.max(0.0).sqrt(), "lanczos-lower"))
    }
}

fn word_block_duality(z: &WordBlockElement, q: f64) -> Result<WordBlockElement> {
    let mut out = WordBlockElement::zero();
    for (g, m) in z.blocks() {
        out.blocks.insert(g.clone(), harmonic::duality_map(m, q)?);
    }
    Ok(out)
}

/// Nonlinear power method lower bound for `‖y ↦ x⋆y‖_{q→q}` on lengths `≤ k`.
fn word_lq_operator_norm(x: &WordBlockElement, q: f64, k: usize, seed: u64, wc: &WordCategory) -> Result<f64> {
    let qd = harmonic::conjugate_exponent(q);
    let mut rng = trial_rng(seed, 0x57D, k as u64);
    let mut y = WordBlockElement::random(&mut rng, &Word::all_up_to(k), wc);
    let mut best = 0.0f64;
    for _ in 0..30 {
        let z = word_convolve(x, &y, wc)?;
        let r = word_lq_norm(&z, q, wc)? / word_lq_norm(&y, q, wc)?;
        if r <= best * (1.0 + 1e-10) {
            break;
        }
        best = r;
        let w = word_convolve_adjoint(x, &word_block_duality(&z, q)?, k, wc)?;
        y = word_block_duality(&w, qd)?;
        if y.is_zero() {
            break;
        }
    }
    Ok(best)
}

/// `max_trials ‖x⋆·‖_{q→q} / ((n+1)‖x‖_q)` for random `x` supported on words of length `n`.
pub fn word_global_rd(n: usize, q: f64, k: usize, trials: usize, seed: u64, wc: &WordCategory) -> Result<GlobalRD> {
    if n + k > wc.max_len() {
        return Err(FqgError::WordBudget { len: n + k, max: wc.max_len() });
    }
    let mut ratio = 0.0f64;
    let mut method = "exact";
    for t in 0..trials {
        let mut rng = trial_rng(seed, 0x5EED_0000 + n as u64, t as u64);
        let x = WordBlockElement::random(&mut rng, &Word::all_of_length(n), wc);
        let (norm, m) = if q == 2.0 {
            word_l2_operator_norm(&x, k, wc)?
        } else {
            (word_lq_operator_norm(&x, q, k, seed ^ t as u64, wc)?, "power-lower")
        };
        method = m;
        ratio = ratio.max(norm / ((n + 1) as f64 * word_lq_norm(&x, q, wc)?));
    }
    Ok(GlobalRD { n, q, k_trunc: k, ratio, method, trials, seed, bound: "lower" })
}

// ---------------------------------------------------------------------------
// Even-word and full-monoid series

/// `ln Σ_{ℓ(g) = n} dim(H_g)²` for `n ≤ n_max`, from the run decomposition:
/// `W_n = 2A_n` (`n ≥ 1`), `A_n = Σ_{m=1}^n S_m(N)² A_{n−m}`, `A_0 = 1`.
pub fn log_length_mass(big_n: usize, n_max: usize) -> Vec<f64> {
    let ls = spectral::chebyshev_log_table(n_max, big_n as f64);
    let mut la = vec![0.0f64];
    for n in 1..=n_max {
        let v = (1..=n).fold(f64::NEG_INFINITY, |acc, m| spectral::log_add(acc, 2.0 * ls[m] + la[n - m]));
        la.push(v);
    }
    la.iter().enumerate().map(|(n, a)| if n == 0 { 0.0 } else { a + 2f64.ln() }).collect()
}

/// Radius of convergence `z*` of `Σ_n W_n zⁿ`: the root of `Σ_{m≥1} S_m(N)² z^m = 1`,
/// using `Σ_{m≥0} S_m(N)² z^m = (1+z) / ((1−z)((1+z)² − N² z))`.
pub fn full_monoid_radius(big_n: usize) -> f64 {
    let nn = (big_n * big_n) as f64;
    let gen = |z: f64| (1.0 + z) / ((1.0 - z) * ((1.0 + z) * (1.0 + z) - nn * z));
    let (mut lo, mut hi) = (0.0, spectral::rho(big_n as f64).powi(-2));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gen(mid) < 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct FullMonoidReport {
    pub r: f64,
    pub p: f64,
    pub big_n: usize,
    pub max_len: usize,
    /// `ln Σ_{n ≤ m} r^{np} W_n` for `m = 0..=max_len`.
    pub log_partial_sums: Vec<f64>,
    /// `r^p W_{n+1} / W_n` at the last length.
    pub tail_ratio: f64,
    /// Terms nondecreasing over the second half and tail ratio above one.
    pub monotone_blow_up: bool,
    /// Analytic: the series diverges iff `r^p ≥ z*`.
    pub radius: f64,
    pub analytic: spectral::SeriesVerdict,
}

pub fn full_monoid_series(r: f64, p: f64, big_n: usize, max_len: usize) -> Result<FullMonoidReport> {
    if !(r > 0.0 && r < 1.0) || max_len < 2 {
        return Err(FqgError::Domain(format!("full-monoid series needs 0 < r < 1 and length ≥ 2, got ({r}, {max_len})")));
    }
    let lw = log_length_mass(big_n, max_len + 1);
    let terms: Vec<f64> = lw.iter().enumerate().map(|(n, w)| n as f64 * p * r.ln() + w).collect();
    let mut acc = f64::NEG_INFINITY;
    let log_partial_sums: Vec<f64> = terms[..=max_len]
        .iter()
        .map(|&t| {
            acc = spectral::log_add(acc, t);
            acc
        })
        .collect();
    let tail_ratio = (terms[max_len + 1] - terms[max_len]).exp();
    let half = max_len / 2;
    let monotone_blow_up = tail_ratio > 1.0 && terms[half.max(1)..=max_len].windows(2).all(|w| w[1] >= w[0]);
    let radius = full_monoid_radius(big_n);
    let rp = r.powf(p);
    let analytic = if (rp - radius).abs() < spectral::BOUNDARY_DELTA {
        spectral::SeriesVerdict::Boundary
    } else if rp < radius {
        spectral::SeriesVerdict::Converges
    } else {
        spectral::SeriesVerdict::Diverges
    };
    Ok(FullMonoidReport { r, p, big_n, max_len, log_partial_sums, tail_ratio, monotone_blow_up, radius, analytic })
}

#[derive(Clone, Debug, Serialize)]
pub struct EvenSeriesReport {
    /// `Σ_n r^{2np} S_{2n}(N)²` (alternating words of even length).
    pub even: SeriesReport,
    pub full_monoid: FullMonoidReport,
}

/// Even-word series (same threshold `ρ^{−2/p}` as the full orthogonal series) and the
/// full-monoid series over all words up to length `min(n_max, 20)`.
pub fn even_series_classify(r: f64, p: f64, big_n: usize, n_max: usize) -> Result<EvenSeriesReport> {
    let even = spectral::series_classify_with(r, p, big_n, n_max, spectral::BOUNDARY_DELTA, 2)?;
    let full_monoid = full_monoid_series(r, p, big_n, n_max.min(20))?;
    Ok(EvenSeriesReport { even, full_monoid })
}

#[derive(Clone, Debug, Serialize)]
pub struct EvenExoticWindow {
    pub p: f64,
    pub p_prime: f64,
    pub big_n: usize,
    pub r0: f64,
    pub r_phi: f64,
    pub weakly_lp_prime: bool,
    pub weakly_lp: bool,
    pub split: bool,
    pub detail_p_prime: WeakLpVerdict,
    pub detail_p: WeakLpVerdict,
    /// Even series `Σ r₀^{2np} S_{2n}²` at `p'` and `p`.
    pub even_series: (spectral::SeriesVerdict, spectral::SeriesVerdict),
}

/// Weak-`L_p` verdicts of the length profile of `φ` restricted to even alternating words,
/// where `dim H_{g_{2n}} = S_{2n}(N)`.
pub fn even_weak_lp_classify(phi: &CentralElement, p: f64, big_n: usize) -> Result<WeakLpVerdict> {
    let mut v = harmonic::weak_lp_classify_with(phi, p, big_n, 2)?;
    v.caveat = Some(match v.caveat {
        Some(c0) => format!("even-length words only; {c0}"),
        None => "even-length words only".into(),
    });
    Ok(v)
}

/// The even-word analogue of the exotic window at the midpoint rate `r₀`.
pub fn even_exotic_window(p: f64, p_prime: f64, big_n: usize) -> Result<EvenExoticWindow> {
    if !(p >= 2.0 && p_prime > p) {
        return Err(FqgError::Domain(format!("need 2 ≤ p < p', got ({p}, {p_prime})")));
    }
    let r0 = 0.5 * (spectral::threshold(p, big_n)? + spectral::threshold(p_prime, big_n)?);
    let r_phi = harmonic::poisson_parameter_for_rate(r0, big_n)?;
    let phi = CentralElement::new(CentralKind::PoissonLike { r: r_phi }, big_n, harmonic::WEAK_LP_N_MAX);
    let dp = even_weak_lp_classify(&phi, p_prime, big_n)?;
    let d = even_weak_lp_classify(&phi, p, big_n)?;
    let sp = spectral::series_classify_with(r0, p_prime, big_n, 200, spectral::BOUNDARY_DELTA, 2)?;
    let s = spectral::series_classify_with(r0, p, big_n, 200, spectral::BOUNDARY_DELTA, 2)?;
    let weakly_lp_prime = dp.verdict == harmonic::Verdict::WeaklyLp;
    let weakly_lp = d.verdict == harmonic::Verdict::WeaklyLp;
    Ok(EvenExoticWindow {
        p,
        p_prime,
        big_n,
        r0,
        r_phi,
        weakly_lp_prime,
        weakly_lp,
        split: weakly_lp_prime && !weakly_lp,
        detail_p_prime: dp,
        detail_p: d,
        even_series: (sp.analytic, s.analytic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn decompose_u_ubar() {
        let f = fusion_decompose(&w("u"), &w("U"));
        assert_eq!(f.len(), 2);
        assert_eq!((f[0].gamma.clone(), f[0].tau.clone()), (w("uU"), Word::empty()));
        assert_eq!((f[1].gamma.clone(), f[1].tau.clone(), f[1].g_rest.clone()), (Word::empty(), w("u"), Word::empty()));
        assert_eq!(fusion_decompose(&w("u"), &w("u")).len(), 1);
        let g: Vec<Word> = fusion_decompose(&w("uU"), &w("uU")).into_iter().map(|f| f.gamma).collect();
        assert_eq!(g, vec![w("uUuU"), w("uU"), Word::empty()]);
        let g: Vec<Word> = fusion_decompose(&w("uU"), &w("Uu")).into_iter().map(|f| f.gamma).collect();
        assert_eq!(g, vec![w("uUUu")]);
    }

    #[test]
    fn small_dims() {
        assert_eq!(dim_word(&w("u"), 3).unwrap(), 3);
        assert_eq!(dim_word(&w("uU"), 3).unwrap(), 8);
        assert_eq!(dim_word(&w("uUu"), 3).unwrap(), 21);
        assert_eq!(dim_word(&w("uu"), 3).unwrap(), 9);
        assert_eq!(dim_word(&Word::empty(), 3).unwrap(), 1);
    }

    #[test]
    fn word_strings_round_trip() {
        for g in Word::all_up_to(3) {
            assert_eq!(g.to_string().parse::<Word>().unwrap(), g);
        }
        assert!("uxU".parse::<Word>().is_err());
        let s = serde_json::to_string(&w("uUU")).unwrap();
        assert_eq!(s, "\"uUU\"");
    }

    #[test]
    fn projection_of_u_ubar() {
        let wc = WordCategory::new(3, 4).unwrap();
        let p = wc.colored_projection(&w("uU")).unwrap();
        let t = intertwiners::invariant_vector(&QGParams::identity(3).unwrap());
        let expect = linalg::sub(&linalg::eye(9), &linalg::mm(&t, t.adjoint()));
        assert!(linalg::frob(&linalg::sub(&p, &expect)) < 1e-12);
        assert_eq!(wc.basis(&w("uu")).unwrap().ncols(), 9);
    }

    #[test]
    fn bottom_isometry_is_the_cup() {
        let wc = WordCategory::new(3, 4).unwrap();
        let v = wc.word_isometry(&Word::empty(), &w("u"), &w("U")).unwrap();
        let t = intertwiners::invariant_vector(&QGParams::identity(3).unwrap());
        assert!(linalg::frob(&linalg::sub(&v, &t)) < 1e-12);
        assert!(wc.completeness_defect(&w("u"), &w("U")).unwrap() < 1e-8);
    }

    #[test]
    fn full_monoid_radius_matches_mass_growth() {
        let lw = log_length_mass(3, 400);
        let growth = (lw[400] - lw[399]).exp();
        assert!((growth * full_monoid_radius(3) - 1.0).abs() < 1e-6);
    }
}
