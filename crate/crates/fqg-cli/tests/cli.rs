use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fqg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fqg"))
        .args(args)
        .current_dir(dir)
        .env_remove("FQG_CACHE")
        .output()
        .expect("spawn fqg")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn dims_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"params": {"N": 3}, "levels": 6}"#);
    let o = fqg(&["dims", "--config", &cfg, "--out", "out", "-q"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(tmp.path().join("out/dims.csv")).unwrap();
    let dims: Vec<String> = rd.records().map(|r| r.unwrap()[1].to_string()).collect();
    assert_eq!(dims, ["1", "3", "8", "21", "55", "144", "377"]);
    let r = report(&tmp.path().join("out"));
    assert_eq!(r["experiment"], "dims");
    assert_eq!(r["params"]["N"], 3);
    assert_eq!(r["verdict"], "PASS");
}

#[test]
fn exotic_window_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fqg(&["exotic-window", "--out", "w", "-q"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&tmp.path().join("w"));
    assert_eq!(r["verdict"], "PASS");
    let c = &r["constants"]["window_3_5"];
    let (lo, hi) = (c["window"][0].as_f64().unwrap(), c["window"][1].as_f64().unwrap());
    let r0 = c["r0"].as_f64().unwrap();
    assert!(lo < r0 && r0 < hi);
    assert!(tmp.path().join("w/exotic_window.csv").exists());
}

#[test]
fn jw_validate_small() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"params": {"N": 4, "F": "symplectic"}, "levels": 4, "completeness": 2}"#);
    let o = fqg(&["jw-validate", "--config", &cfg, "--out", "o", "-q"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&tmp.path().join("o"));
    assert_eq!(r["params"]["epsilon"], -1);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "PASS"));
}

#[test]
fn reports_are_deterministic_apart_from_runtime() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"params": {"N": 3}, "trials": 6, "seed": 17, "max_level": 6}"#);
    for out in ["a", "b"] {
        let o = fqg(&["conv-check", "--config", &cfg, "--out", out, "-q"], tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let strip = |d: &str| {
        let mut v = report(&tmp.path().join(d));
        assert!(v.as_object_mut().unwrap().remove("runtime").is_some());
        v
    };
    assert_eq!(strip("a"), strip("b"));
    // byte-level: the serialized body is identical once runtime is dropped
    let body = |d: &str| {
        let text = std::fs::read_to_string(tmp.path().join(d).join("report.json")).unwrap();
        let start = text.find("\"runtime\":").unwrap();
        let end = start + text[start..].find('}').unwrap() + 1;
        format!("{}{}", &text[..start], &text[end..])
    };
    assert_eq!(body("a"), body("b"));
    assert_eq!(strip("a")["seed"], 17);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"trials": 3, "seed": 1, "max_level": 6}"#);
    let o = fqg(&["conv-check", "--config", &cfg, "--seed", "9", "--out", "o", "-q"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(report(&tmp.path().join("o"))["seed"], 9);
}

#[test]
fn unknown_config_field_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"params": {"N": 3}, "sed": 4}"#);
    let o = fqg(&["dims", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown field `sed`"), "{}", stderr(&o));
    let cfg = write_config(tmp.path(), "d.json", r#"{"params": {"N": "three"}}"#);
    let o = fqg(&["dims", "--config", &cfg], tmp.path());
    assert!(stderr(&o).contains("`params.N`"), "{}", stderr(&o));
}

#[test]
fn randomized_experiments_need_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fqg(&["schatten", "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn memory_budget_is_checked_before_compute() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"params": {"N": 5}, "seed": 1, "truncation": 6}"#);
    let o = fqg(&["trace-iterate", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MB"), "{}", stderr(&o));
}

#[test]
fn experiment_name_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"experiment": "fusion"}"#);
    let o = fqg(&["dims", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`experiment`"), "{}", stderr(&o));
}

#[test]
fn cache_list_verify_purge() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let cache_s = cache.to_string_lossy().into_owned();
    let cfg = write_config(tmp.path(), "c.json", r#"{"levels": 3, "completeness": 1}"#);
    let o = fqg(&["jw-validate", "--config", &cfg, "--cache", &cache_s, "--out", "o", "-q"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let misses = report(&tmp.path().join("o"))["runtime"]["cache_misses"].as_u64().unwrap();
    assert!(misses > 0);

    // a second run is served from disk
    let o = fqg(&["jw-validate", "--config", &cfg, "--cache", &cache_s, "--out", "p", "-q"], tmp.path());
    assert!(o.status.success());
    assert!(report(&tmp.path().join("p"))["runtime"]["cache_hits"].as_u64().unwrap() > 0);

    let o = fqg(&["cache", "list", "--cache", &cache_s], tmp.path());
    assert!(o.status.success());
    let listing = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(listing.lines().count() > 1, "{listing}");

    let o = fqg(&["cache", "verify", "--cache", &cache_s], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));

    // flip a payload byte: verify reports it and exits non-zero
    let fam = std::fs::read_dir(&cache).unwrap().next().unwrap().unwrap().path();
    let victim = std::fs::read_dir(&fam)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| !p.to_string_lossy().ends_with(".sha256"))
        .unwrap();
    let mut bytes = std::fs::read(&victim).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xFF;
    std::fs::write(&victim, bytes).unwrap();
    let o = fqg(&["cache", "verify", "--cache", &cache_s], tmp.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("ChecksumMismatch"));

    let o = fqg(&["cache", "purge", "--f-hash", "ffff", "--cache", &cache_s], tmp.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains("removed 0"));
    let o = fqg(&["cache", "purge", "--cache", &cache_s], tmp.path());
    assert!(o.status.success());
    let o = fqg(&["cache", "list", "--cache", &cache_s], tmp.path());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);
}
