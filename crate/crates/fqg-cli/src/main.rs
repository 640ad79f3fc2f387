use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fqg_cli::config::{ExperimentConfig, CACHE_ENV};
use fqg_cli::experiments::Experiment;
use fqg_cli::report::sig6;
use fqg_core::cache::{Cache, VerifyStatus};

#[derive(Parser)]
#[command(name = "fqg", version, about = "Free orthogonal/unitary quantum group workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json and CSV tables
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disk cache for intertwiners
    #[arg(long, env = CACHE_ENV)]
    cache: Option<PathBuf>,
    #[arg(long)]
    max_level: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Do not print the summary table
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// S_n(N) table
    Dims(Common),
    /// Fusion ranges and isometry defects
    Fusion(Common),
    /// Jones–Wenzl projections and fusion completeness
    JwValidate(Common),
    /// Convolution formula against the pairing oracle
    ConvCheck(Common),
    /// Schatten-class contraction trials
    Schatten(Common),
    /// Local block-inequality scan
    RdLocal(Common),
    /// Truncated operator-norm ratios R(n)
    RdGlobal(Common),
    /// Convergence thresholds of the length series
    Thresholds(Common),
    /// Weak-L_p split between two exponents
    ExoticWindow(Common),
    /// Positive-definiteness Gram tests
    PdGram(Common),
    /// Iterates of the trace map towards the Haar state
    TraceIterate(Common),
    /// Free unitary word layer
    UnitaryScan(Common),
    /// All acceptance criteria
    FullSuite(Common),
    /// Inspect the intertwiner cache
    Cache {
        #[command(subcommand)]
        action: CacheCmd,
        #[arg(long, env = CACHE_ENV, global = true)]
        cache: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CacheCmd {
    List,
    Verify,
    Purge {
        /// Only entries for this F hash (hex)
        #[arg(long)]
        f_hash: Option<String>,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let (exp, common) = match cli.cmd {
        Cmd::Cache { action, cache } => return cache_cmd(action, cache),
        Cmd::Dims(c) => (Experiment::Dims, c),
        Cmd::Fusion(c) => (Experiment::Fusion, c),
        Cmd::JwValidate(c) => (Experiment::JwValidate, c),
        Cmd::ConvCheck(c) => (Experiment::ConvCheck, c),
        Cmd::Schatten(c) => (Experiment::Schatten, c),
        Cmd::RdLocal(c) => (Experiment::RdLocal, c),
        Cmd::RdGlobal(c) => (Experiment::RdGlobal, c),
        Cmd::Thresholds(c) => (Experiment::Thresholds, c),
        Cmd::ExoticWindow(c) => (Experiment::ExoticWindow, c),
        Cmd::PdGram(c) => (Experiment::PdGram, c),
        Cmd::TraceIterate(c) => (Experiment::TraceIterate, c),
        Cmd::UnitaryScan(c) => (Experiment::UnitaryScan, c),
        Cmd::FullSuite(c) => (Experiment::FullSuite, c),
    };
    let (mut cfg, base) = match &common.config {
        Some(p) => (ExperimentConfig::from_file(p)?, p.parent().map(|b| b.to_path_buf())),
        None => (ExperimentConfig::default(), None),
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.max_level.is_some() {
        cfg.max_level = common.max_level;
    }
    if common.tol.is_some() {
        cfg.tol = common.tol;
    }
    // the env fallback is handled by clap
    if common.cache.is_some() {
        cfg.cache_dir = common.cache.clone();
    }
    let out_dir = common.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| fqg_cli::default_out_dir(exp));

    let report = fqg_cli::run(exp, &cfg, base.as_deref())?;
    report.write(&out_dir)?;
    if !common.quiet {
        print_summary(&report);
        println!("report: {}", out_dir.join("report.json").display());
    }
    Ok(if report.hard_failure() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn print_summary(r: &fqg_cli::Report) {
    let out = &r.result.outcome;
    for c in &r.result.criteria {
        println!("{}", c.line());
    }
    if !r.result.criteria.is_empty() {
        println!();
    }
    println!("{:<13} {:<64} {:>14} {:>3} {:>12}", "status", "check", "value", "", "limit");
    for c in &out.checks {
        let v = c.value.map(sig6).unwrap_or_default();
        let l = c.limit.map(sig6).unwrap_or_default();
        let mut name = c.name.clone();
        if name.chars().count() > 64 {
            name = name.chars().take(61).collect::<String>() + "...";
        }
        println!("{:<13} {:<64} {:>14} {:>3} {:>12}", c.status.to_string(), name, v, c.relation.unwrap_or(""), l);
        if let Some(k) = &c.known {
            println!("{:<13} ({k})", "");
        }
    }
    for (k, v) in &out.constants {
        if let Some(x) = v.as_f64() {
            println!("{k:<40} {}", sig6(x));
        }
    }
    println!("verdict: {}", out.status());
}

fn cache_cmd(action: CacheCmd, dir: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let dir = dir.with_context(|| format!("no cache directory: pass --cache or set {CACHE_ENV}"))?;
    let cache = Cache::new(dir);
    match action {
        CacheCmd::List => {
            println!("{:<16} {:<10} {:<12} {:>10} {:>12}", "f_hash", "kind", "levels", "shape", "bytes");
            for e in cache.list()? {
                let lv = format!("{:?}", e.levels);
                println!("{:<16} {:<10} {:<12} {:>10} {:>12}", &e.f_hash[..16.min(e.f_hash.len())], e.kind, lv, format!("{}x{}", e.rows, e.cols), e.bytes);
            }
            Ok(ExitCode::SUCCESS)
        }
        CacheCmd::Verify => {
            let mut bad = 0;
            for (p, s) in cache.verify()? {
                if s != VerifyStatus::Ok {
                    bad += 1;
                }
                println!("{:?} {}", s, p.display());
            }
            Ok(if bad == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        CacheCmd::Purge { f_hash } => {
            let n = cache.purge(f_hash.as_deref())?;
            println!("removed {n} entries");
            Ok(ExitCode::SUCCESS)
        }
    }
}
