use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use fqg_core::linalg::{C64, CMat};
use fqg_core::QGParams;
use serde::{Deserialize, Serialize};

pub const CACHE_ENV: &str = "FQG_CACHE";

/// The quantum-group parameters: `N` and the family of `F`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    #[serde(rename = "N")]
    pub big_n: usize,
    /// `identity`, `symplectic`, `phase-twisted`, or `file:<path>` holding a JSON
    /// `N × N` array of `[re, im]` pairs.
    #[serde(rename = "F", default = "default_f")]
    pub f: String,
}

fn default_f() -> String {
    "identity".into()
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet { big_n: 3, f: default_f() }
    }
}

impl ParamSet {
    pub fn build(&self, base: Option<&Path>) -> anyhow::Result<QGParams> {
        if self.big_n < 3 {
            bail!("params.N: need N ≥ 3, got {}", self.big_n);
        }
        let p = match self.f.strip_prefix("file:") {
            Some(path) => {
                let path = match base {
                    Some(b) if Path::new(path).is_relative() => b.join(path),
                    _ => PathBuf::from(path),
                };
                QGParams::new(load_matrix(&path, self.big_n)?)
            }
            None => QGParams::named(&self.f, self.big_n),
        };
        p.map_err(|e| anyhow!("params.F: {e}"))
    }
}

fn load_matrix(path: &Path, n: usize) -> anyhow::Result<CMat> {
    let text = std::fs::read_to_string(path).with_context(|| format!("params.F: reading {}", path.display()))?;
    let rows: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(&text).with_context(|| format!("params.F: parsing {}", path.display()))?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        bail!("params.F: {} is not {n}×{n}", path.display());
    }
    Ok(CMat::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// A single JSON experiment description. Every field has a per-experiment default;
/// command-line flags override the corresponding fields.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default)]
    pub params: ParamSet,
    /// Highest level `n` (orthogonal layer).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Highest word length (unitary layer).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    /// `(p, p')` pairs for the exotic window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<usize>,
    /// Truncation level `K` for operator-norm estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Iteration count for `trace-iterate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Highest `n`, `k` for the fusion completeness check in `jw-validate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness: Option<usize>,
    /// Family size for Gram tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a config document; errors name the offending field path.
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                anyhow!("config: {inner}")
            } else {
                anyhow!("config field `{path}`: {inner}")
            }
        })
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// `--cache` flag, then the config field, then `FQG_CACHE`.
    pub fn resolve_cache(&mut self, flag: Option<PathBuf>) {
        if let Some(f) = flag {
            self.cache_dir = Some(f);
        }
        if self.cache_dir.is_none() {
            self.cache_dir = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        }
    }

    pub fn require_seed(&self) -> anyhow::Result<u64> {
        self.seed.ok_or_else(|| anyhow!("config field `seed`: required for randomized experiments (or pass --seed)"))
    }

    pub fn qs(&self, default: &[f64]) -> Vec<f64> {
        self.q.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn ps(&self, default: &[f64]) -> Vec<f64> {
        self.p.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn rs(&self, default: &[f64]) -> Vec<f64> {
        self.r.clone().unwrap_or_else(|| default.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected_with_a_path() {
        let e = ExperimentConfig::from_json(r#"{"params": {"N": 3, "G": "identity"}}"#).unwrap_err();
        let msg = format!("{e:#}");
        assert!(msg.contains("params") && msg.contains("unknown field `G`"), "{msg}");
        let e = ExperimentConfig::from_json(r#"{"seed": "seven"}"#).unwrap_err();
        assert!(format!("{e:#}").contains("`seed`"), "{e:#}");
        let e = ExperimentConfig::from_json(r#"{"q": [1.0, "x"]}"#).unwrap_err();
        assert!(format!("{e:#}").contains("`q[1]`"), "{e:#}");
    }

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::from_json(r#"{"params": {"N": 4, "F": "symplectic"}, "seed": 3}"#).unwrap();
        assert_eq!(c.params.big_n, 4);
        assert_eq!(c.params.build(None).unwrap().epsilon(), -1);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(ExperimentConfig::from_json("{}").unwrap().params, ParamSet::default());
    }

    #[test]
    fn explicit_matrix_file() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("f.json");
        std::fs::write(&f, "[[[0,0],[1,0],[0,0]],[[1,0],[0,0],[0,0]],[[0,0],[0,0],[1,0]]]").unwrap();
        let set = ParamSet { big_n: 3, f: "file:f.json".into() };
        assert_eq!(set.build(Some(dir.path())).unwrap().epsilon(), 1);
        let bad = ParamSet { big_n: 4, f: "file:f.json".into() };
        assert!(bad.build(Some(dir.path())).is_err());
    }
}
