use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use fqg_core::cache::Cache;
use fqg_core::trace::{self, MEMORY_BUDGET_MB};
use fqg_core::{harmonic, spectral, Category, QGParams};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::report::{Check, Outcome, Table};
use crate::suite::{self, CriterionReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Dims,
    Fusion,
    JwValidate,
    ConvCheck,
    Schatten,
    RdLocal,
    RdGlobal,
    Thresholds,
    ExoticWindow,
    PdGram,
    TraceIterate,
    UnitaryScan,
    FullSuite,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Experiment::Dims,
        Experiment::Fusion,
        Experiment::JwValidate,
        Experiment::ConvCheck,
        Experiment::Schatten,
        Experiment::RdLocal,
        Experiment::RdGlobal,
        Experiment::Thresholds,
        Experiment::ExoticWindow,
        Experiment::PdGram,
        Experiment::TraceIterate,
        Experiment::UnitaryScan,
        Experiment::FullSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Dims => "dims",
            Experiment::Fusion => "fusion",
            Experiment::JwValidate => "jw-validate",
            Experiment::ConvCheck => "conv-check",
            Experiment::Schatten => "schatten",
            Experiment::RdLocal => "rd-local",
            Experiment::RdGlobal => "rd-global",
            Experiment::Thresholds => "thresholds",
            Experiment::ExoticWindow => "exotic-window",
            Experiment::PdGram => "pd-gram",
            Experiment::TraceIterate => "trace-iterate",
            Experiment::UnitaryScan => "unitary-scan",
            Experiment::FullSuite => "full-suite",
        }
    }

    pub fn randomized(self) -> bool {
        matches!(
            self,
            Experiment::ConvCheck
                | Experiment::Schatten
                | Experiment::RdLocal
                | Experiment::RdGlobal
                | Experiment::PdGram
                | Experiment::TraceIterate
                | Experiment::UnitaryScan
                | Experiment::FullSuite
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .with_context(|| format!("unknown experiment `{s}`"))
    }
}

/// Everything one run produced. `criteria` is filled only by the full suite.
#[derive(Debug, Default)]
pub struct RunResult {
    pub outcome: Outcome,
    pub criteria: Vec<CriterionReport>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    params: QGParams,
}

impl Ctx<'_> {
    fn category(&self, max_level: usize) -> Category {
        let c = Category::new(self.params.clone(), self.cfg.max_level.unwrap_or(max_level));
        match &self.cfg.cache_dir {
            Some(d) => c.with_cache(Cache::new(d)),
            None => c,
        }
    }

    fn max_level(&self, default: usize) -> usize {
        self.cfg.max_level.unwrap_or(default)
    }

    fn seed(&self) -> anyhow::Result<u64> {
        self.cfg.require_seed()
    }

    fn big_n(&self) -> usize {
        self.params.n()
    }
}

fn preflight(level: usize, big_n: usize, what: &str) -> anyhow::Result<()> {
    let need = trace::basis_memory_mb(level, big_n);
    if need > MEMORY_BUDGET_MB {
        bail!("{what}: level {level} at N = {big_n} needs ~{need} MB, over the {MEMORY_BUDGET_MB} MB budget");
    }
    Ok(())
}

fn tally(out: &mut Outcome, cats: &[&Category]) {
    let (h, m) = cats.iter().fold((0, 0), |(h, m), c| {
        let (a, b) = c.cache_stats();
        (h + a, m + b)
    });
    out.runtime.insert("cache_hits".into(), json!(h));
    out.runtime.insert("cache_misses".into(), json!(m));
}

pub fn run(exp: Experiment, cfg: &ExperimentConfig, base: Option<&Path>) -> anyhow::Result<RunResult> {
    let params = cfg.params.build(base)?;
    if exp.randomized() {
        cfg.require_seed()?;
    }
    let cx = Ctx { cfg, params };
    let outcome = match exp {
        Experiment::Dims => dims(&cx)?,
        Experiment::Fusion => fusion(&cx)?,
        Experiment::JwValidate => jw_validate(&cx)?,
        Experiment::ConvCheck => {
            let ml = cx.max_level(7);
            preflight(ml, cx.big_n(), "conv-check")?;
            let cat = cx.category(7);
            let mut out = suite::convolution_oracle(&cat, cfg.trials.unwrap_or(200), cx.seed()?)?;
            tally(&mut out, &[&cat]);
            out
        }
        Experiment::Schatten => {
            let qs = cfg.qs(&[1.0, 1.25, 1.5, 2.0]);
            suite::schatten_grid(cfg.levels.unwrap_or(4), &qs, cfg.trials.unwrap_or(2000), cx.seed()?)?
        }
        Experiment::RdLocal => {
            let levels = cfg.levels.unwrap_or(4);
            preflight(2 * levels, cx.big_n(), "rd-local")?;
            let cat = cx.category(2 * levels);
            let qs = cfg.qs(&[1.0, 1.5, 2.0]);
            let (mut out, _) = suite::rd_local(&cat, &qs, levels, cfg.trials.unwrap_or(2), cx.seed()?)?;
            tally(&mut out, &[&cat]);
            out
        }
        Experiment::RdGlobal => rd_global(&cx)?,
        Experiment::Thresholds => thresholds(&cx)?,
        Experiment::ExoticWindow => {
            let pairs = cfg.pairs.clone().unwrap_or_else(|| vec![(2.0, 4.0), (3.0, 5.0), (2.0, 8.0)]);
            suite::exotic_windows(&pairs, cx.big_n(), &pairs)?
        }
        Experiment::PdGram => {
            let levels = cfg.levels.unwrap_or(2);
            preflight(2 * levels, cx.big_n(), "pd-gram")?;
            let cat = cx.category(2 * levels + 1);
            let mut out = suite::gram_tests(
                &cat,
                &cfg.rs(&[0.7, 0.9]),
                cfg.family.unwrap_or(6),
                levels,
                cfg.trials.unwrap_or(12),
                cx.seed()?,
            )?;
            let band: Vec<f64> = (80..=99).map(|i| i as f64 / 100.0).collect();
            out.merge(suite::chebyshev_band(cx.big_n(), &band, 40));
            tally(&mut out, &[&cat]);
            out
        }
        Experiment::TraceIterate => trace_iterate(&cx)?,
        Experiment::UnitaryScan => {
            let lengths = cfg.lengths.unwrap_or(4);
            suite::unitary_checks(
                cx.big_n(),
                lengths,
                &cfg.qs(&[2.0, 1.5]),
                cfg.trials.unwrap_or(2),
                20,
                cx.seed()?,
            )?
        }
        Experiment::FullSuite => return full_suite(cx.seed()?),
    };
    Ok(RunResult { outcome, criteria: Vec::new() })
}

fn dims(cx: &Ctx) -> anyhow::Result<Outcome> {
    let big_n = cx.big_n();
    let levels = cx.cfg.levels.unwrap_or(8);
    let mut out = Outcome::default();
    let mut t = Table::new("dims", &["n", "dim", "closed_form"]);
    let mut worst = 0.0f64;
    for n in 0..=levels {
        let exact = spectral::chebyshev_dim(n, big_n as u128)?;
        let cf = spectral::chebyshev_closed_form(n, big_n as f64);
        worst = worst.max((cf - exact as f64).abs() / exact as f64);
        t.push([n.to_string(), exact.to_string(), cf.to_string()]);
    }
    out.checks.push(Check::le(format!("closed form vs recursion, n ≤ {levels}"), worst, 1e-12));
    out.constant("rho", spectral::rho(big_n as f64));
    out.constant("dim_ratio_constant", spectral::empirical_dim_constant(levels.min(40), big_n));
    out.tables.push(t);
    Ok(out)
}

fn fusion(cx: &Ctx) -> anyhow::Result<Outcome> {
    let big_n = cx.big_n();
    let levels = cx.cfg.levels.unwrap_or(3);
    let tol = cx.cfg.tol.unwrap_or(1e-9);
    preflight(2 * levels, big_n, "fusion")?;
    let cat = cx.category(2 * levels);
    let mut out = Outcome::default();
    let mut t = Table::new("fusion", &["n", "k", "l", "dim_l", "isometry_defect"]);
    let (mut coherent, mut worst) = (true, 0.0f64);
    for n in 0..=levels {
        for k in 0..=levels {
            let range = spectral::fusion_range(n, k);
            let sum: usize = range.iter().map(|&l| cat.dim(l)).sum();
            coherent &= sum == cat.dim(n) * cat.dim(k);
            for l in range {
                let v = cat.fusion_isometry(n, k, l)?;
                let d = fqg_core::linalg::isometry_defect(&v);
                worst = worst.max(d);
                t.push([n.to_string(), k.to_string(), l.to_string(), cat.dim(l).to_string(), d.to_string()]);
            }
        }
    }
    out.checks.push(Check::truth(format!("d_n d_k = Σ d_l, n, k ≤ {levels}"), coherent));
    out.checks.push(Check::le("V*V = I", worst, tol));
    out.tables.push(t);
    tally(&mut out, &[&cat]);
    Ok(out)
}

fn jw_validate(cx: &Ctx) -> anyhow::Result<Outcome> {
    let levels = cx.cfg.levels.unwrap_or(5);
    let comp = cx.cfg.completeness.unwrap_or(2);
    let top = levels.max(2 * comp);
    preflight(top, cx.big_n(), "jw-validate")?;
    let cat = cx.category(top);
    let pairs: Vec<(usize, usize)> = (0..=comp).flat_map(|n| (0..=comp).map(move |k| (n, k))).collect();
    let mut out = suite::category_validity(&cat, levels, &pairs, cx.cfg.tol.unwrap_or(1e-8), None)?;
    tally(&mut out, &[&cat]);
    Ok(out)
}

fn rd_global(cx: &Ctx) -> anyhow::Result<Outcome> {
    let cfg = cx.cfg;
    let seed = cx.seed()?;
    let n_max = cfg.levels.unwrap_or(6);
    let k = cfg.truncation.unwrap_or(2);
    let q = cfg.qs(&[2.0]);
    let [q] = q[..] else { bail!("config field `q`: rd-global takes exactly one exponent") };
    let ml = cx.max_level(7);
    preflight(ml, cx.big_n(), "rd-global")?;
    let cat = cx.category(7);
    let (mut out, consts) = suite::rd_local(&cat, &[q], 4.min(ml / 2), cfg.trials.unwrap_or(2), seed)?;
    out.merge(suite::rd_global(&cat, q, n_max, |_| k, cfg.trials.unwrap_or(2), seed, consts[0].1)?);
    tally(&mut out, &[&cat]);
    Ok(out)
}

fn thresholds(cx: &Ctx) -> anyhow::Result<Outcome> {
    let big_n = cx.big_n();
    let ps = cx.cfg.ps(&[2.0, 3.0, 4.0]);
    let mut out = suite::threshold_law(&[big_n], &ps, &[-0.05, 0.05])?;
    if let Some(rs) = &cx.cfg.r {
        let mut t = Table::new("series", &["r", "p", "threshold", "analytic", "empirical", "tail_ratio"]);
        let mut agree = true;
        for &p in &ps {
            for &r in rs {
                let s = spectral::series_classify(r, p, big_n, harmonic::WEAK_LP_N_MAX)?;
                agree &= s.analytic == s.empirical || s.analytic == spectral::SeriesVerdict::Boundary;
                t.push([r.to_string(), p.to_string(), s.threshold.to_string(), format!("{:?}", s.analytic), format!("{:?}", s.empirical), s.tail_ratio.to_string()]);
            }
        }
        out.checks.push(Check::truth("requested r values: analytic = empirical away from the boundary", agree));
        out.tables.push(t);
    }
    Ok(out)
}

fn trace_iterate(cx: &Ctx) -> anyhow::Result<Outcome> {
    let cfg = cx.cfg;
    let seed = cx.seed()?;
    let cap = cfg.truncation.unwrap_or(6);
    preflight(cap + 1, cx.big_n(), "trace-iterate")?;
    let cat = cx.category(cap + 1);
    let (l20, c_n) = suite::l20_check(&cat, cap)?;
    let c_n = c_n.context("truncated norm unavailable")?;
    let mut out = suite::trace_checks(&cat, cfg.trials.unwrap_or(20), cfg.levels.unwrap_or(3).min(cap.saturating_sub(1)), seed)?;
    out.checks.push(l20);
    out.constant("truncated_norm", c_n);
    for q in cfg.qs(&[1.5, 2.0]) {
        if q > 1.0 && q <= 2.0 {
            out.constant(&format!("interpolated_bound_q{q}"), trace::interpolated_bound(q, c_n)?);
        }
    }
    let d_n = harmonic::local_rd_scan(2.0, 3.min(cap / 2), 2, seed, &cat)?.empirical_local_constant;
    out.merge(suite::iteration_checks(&cat, cfg.k_max.unwrap_or(12), cap, c_n, d_n)?);
    tally(&mut out, &[&cat]);
    Ok(out)
}

fn full_suite(seed: u64) -> anyhow::Result<RunResult> {
    let mut out = Outcome::default();
    let mut criteria = Vec::new();
    for (id, ..) in suite::CRITERIA {
        let r = suite::run_criterion(id, seed)?;
        let mut o = r.outcome.clone();
        for c in &mut o.checks {
            c.name = format!("[{id}] {}", c.name);
        }
        out.merge(o);
        criteria.push(r);
    }
    Ok(RunResult { outcome: out, criteria })
}

