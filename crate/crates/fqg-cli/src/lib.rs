//! Experiment runner behind the `fqg` binary: configs, reports and the acceptance suite.

pub mod config;
pub mod experiments;
pub mod report;
pub mod suite;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde_json::{json, Map, Value};

use config::ExperimentConfig;
use experiments::{Experiment, RunResult};
use report::{to_json_17, Status};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A finished run: the deterministic report body plus run-dependent fields.
#[derive(Debug)]
pub struct Report {
    pub experiment: Experiment,
    pub body: Map<String, Value>,
    pub runtime: Map<String, Value>,
    pub result: RunResult,
}

impl Report {
    pub fn verdict(&self) -> Status {
        self.result.outcome.status()
    }

    pub fn hard_failure(&self) -> bool {
        self.result.outcome.hard_failure()
    }

    /// Full report; floats carry 17 significant digits.
    pub fn to_json(&self) -> Vec<u8> {
        let mut m = self.body.clone();
        m.insert("runtime".into(), Value::Object(self.runtime.clone()));
        to_json_17(&Value::Object(m))
    }

    /// Writes `report.json` and one CSV per table into `dir`.
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        for t in &self.result.outcome.tables {
            t.write(dir)?;
        }
        Ok(())
    }
}

pub fn default_out_dir(exp: Experiment) -> PathBuf {
    PathBuf::from("fqg-out").join(exp.name())
}

/// Runs `exp` with `cfg`; `base` resolves relative paths inside the config.
pub fn run(exp: Experiment, cfg: &ExperimentConfig, base: Option<&Path>) -> anyhow::Result<Report> {
    if let Some(name) = &cfg.experiment {
        if name != exp.name() {
            anyhow::bail!("config field `experiment`: `{name}` does not match the requested `{exp}`");
        }
    }
    let params = cfg.params.build(base)?;
    let t = Instant::now();
    let result = experiments::run(exp, cfg, base)?;
    let seconds = t.elapsed().as_secs_f64();

    let out = &result.outcome;
    let mut body = Map::new();
    body.insert("experiment".into(), json!(exp.name()));
    body.insert("workbench_version".into(), json!(VERSION));
    body.insert("config".into(), serde_json::to_value(cfg)?);
    body.insert(
        "params".into(),
        json!({"N": params.n(), "F": cfg.params.f, "f_hash": params.f_hash_hex(), "epsilon": params.epsilon()}),
    );
    body.insert("seed".into(), json!(cfg.seed));
    body.insert("verdict".into(), json!(out.status()));
    body.insert("hard_failure".into(), json!(out.hard_failure()));
    if !result.criteria.is_empty() {
        let rows: Vec<Value> = result
            .criteria
            .iter()
            .map(|c| json!({"id": c.id, "title": c.title, "status": combine_checks(c), "budget_s": c.budget_s}))
            .collect();
        body.insert("criteria".into(), Value::Array(rows));
    }
    body.insert("checks".into(), serde_json::to_value(&out.checks)?);
    body.insert("constants".into(), Value::Object(out.constants.clone()));
    body.insert("tables".into(), json!(out.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>()));

    let mut runtime = out.runtime.clone();
    runtime.insert("seconds".into(), json!(seconds));
    for c in &result.criteria {
        runtime.insert(format!("criterion_{}_status", c.id), json!(c.status));
    }
    Ok(Report { experiment: exp, body, runtime, result })
}

// a criterion's status without its wall-clock budget, so the body stays deterministic
fn combine_checks(c: &suite::CriterionReport) -> Status {
    report::combine(&c.outcome.checks)
}
