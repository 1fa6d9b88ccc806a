use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};
use std::path::{Path, PathBuf};
use std::process::Command;

use mkent_cli::StateFile;
use mkent_core::{canonical_settings, generalized_ghz, PureState};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    json: Option<Value>,
    stderr: String,
}

fn mkent(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_mkent")).args(args).output().expect("spawn mkent");
    Run {
        code: out.status.code().expect("exit code"),
        json: serde_json::from_slice(&out.stdout).ok(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn write_state(dir: &TempDir, name: &str, file: &StateFile) -> PathBuf {
    let path = dir.path().join(name);
    file.write(&path).unwrap();
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn decide_generalized_ghz_is_entangled() {
    let dir = TempDir::new().unwrap();
    let path = write_state(&dir, "psi.json", &StateFile::from_state(&generalized_ghz(3, FRAC_PI_8).unwrap()));
    let run = mkent(&["decide", path_str(&path)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = run.json.unwrap();
    let report = &doc["report"];
    assert_eq!(report["verdict"], "entangled");
    assert!((num(&report["variance"]) - 2.0).abs() < 1e-9);
    assert_eq!(num(&report["bound"]), 4.0);
    assert_eq!(doc["oracle"]["is_product"], false);
    assert_eq!(doc["input"]["renormalized"], false);
}

#[test]
fn decide_basis_state_is_product() {
    let dir = TempDir::new().unwrap();
    let path = write_state(&dir, "b.json", &StateFile::from_state(&PureState::basis(4, 0b0101).unwrap()));
    let run = mkent(&["decide", path_str(&path), "--seed", "3", "--json-indent", "2"]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    let doc = run.json.unwrap();
    assert_eq!(doc["report"]["verdict"], "product");
    assert!((num(&doc["report"]["variance"]) - 8.0).abs() < 1e-6);
    assert_eq!(doc["oracle"]["is_product"], true);
    assert_eq!(doc["report"]["optimizer_metadata"]["starts_used"], 32);
}

#[test]
fn decide_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let short = write_state(&dir, "short.json", &StateFile { n: 3, amplitudes: vec![[0.0, 0.0]; 7] });
    let run = mkent(&["decide", path_str(&short)]);
    assert_eq!(run.code, 2);
    assert!(run.json.is_none());
    assert!(run.stderr.contains("8 amplitudes"), "{}", run.stderr);

    let mut amplitudes = vec![[0.0, 0.0]; 4];
    amplitudes[0] = [1.01, 0.0];
    let off = write_state(&dir, "off.json", &StateFile { n: 2, amplitudes });
    assert_eq!(mkent(&["decide", path_str(&off)]).code, 2);

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"n\": 2, \"amplitudes\": [[1, 0]").unwrap();
    let run = mkent(&["decide", path_str(&garbage)]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("malformed JSON"));

    assert_eq!(mkent(&["decide", path_str(&dir.path().join("missing.json"))]).code, 2);
}

#[test]
fn decide_renormalizes_small_deviation() {
    let dir = TempDir::new().unwrap();
    let mut amplitudes = vec![[0.0, 0.0]; 4];
    amplitudes[0] = [1.0 + 1e-8, 0.0];
    let path = write_state(&dir, "near.json", &StateFile { n: 2, amplitudes });
    let run = mkent(&["decide", path_str(&path)]);
    assert_eq!(run.code, 1);
    let input = &run.json.unwrap()["input"];
    assert_eq!(input["renormalized"], true);
    assert!((num(&input["norm_deviation"]) - 1e-8).abs() < 1e-15);
}

fn scan_rows(args: &[&str]) -> Vec<Value> {
    let run = mkent(args);
    assert_eq!(run.code, 0, "{}", run.stderr);
    run.json.unwrap()["rows"].as_array().unwrap().clone()
}

#[test]
fn ghz_scan_endpoints() {
    let rows = scan_rows(&["ghz-scan", "--n", "3", "--points", "2"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(num(&rows[0]["phi"]), 0.0);
    assert!((num(&rows[0]["variance"]) - 4.0).abs() < 1e-12);
    assert_eq!(num(&rows[0]["closed_form"]), 4.0);
    assert_eq!(rows[0]["verdict"], "product");
    assert_eq!(num(&rows[1]["phi"]), FRAC_PI_4);
    assert!(num(&rows[1]["variance"]).abs() < 1e-12);
    assert_eq!(rows[1]["verdict"], "entangled");
    assert!(rows[0].get("max_mk_mean").is_none());
}

#[test]
fn ghz_scan_default_grid_matches_closed_form() {
    let rows = scan_rows(&["ghz-scan", "--n", "4"]);
    assert_eq!(rows.len(), 21);
    for row in &rows {
        assert!(num(&row["difference"]).abs() < 1e-9);
    }
    assert!(rows[1..].iter().all(|r| r["verdict"] == "entangled"));
}

#[test]
fn ghz_scan_compare_mean_stays_classical() {
    let phi = 0.5 * 0.3f64.asin();
    let phi = phi.to_string();
    let rows = scan_rows(&["ghz-scan", "--n", "3", "--phi-min", &phi, "--phi-max", &phi, "--points", "1", "--compare-mean"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["verdict"], "entangled");
    assert!(num(&rows[0]["max_mk_mean"]) <= 1.0 + 1e-6);
    assert!((num(&rows[0]["margin"]) - 4.0 * 0.09).abs() < 1e-6);
}

#[test]
fn ghz_scan_rejects_bad_ranges() {
    assert_eq!(mkent(&["ghz-scan", "--phi-max", "1.0"]).code, 2);
    assert_eq!(mkent(&["ghz-scan", "--phi-min", "-0.2"]).code, 2);
    assert_eq!(mkent(&["ghz-scan", "--phi-min", "0.5", "--phi-max", "0.2"]).code, 2);
    assert_eq!(mkent(&["ghz-scan", "--n", "1"]).code, 2);
}

fn eigenvalues(doc: &Value) -> Vec<f64> {
    doc["eigenvalues"].as_array().unwrap().iter().map(num).collect()
}

#[test]
fn mk_op_canonical_spectra() {
    let doc = mkent(&["mk-op", "--canonical", "2"]).json.unwrap();
    let ev = eigenvalues(&doc);
    for (x, y) in ev.iter().zip([SQRT_2, 0.0, 0.0, -SQRT_2]) {
        assert!((x - y).abs() < 1e-12, "{ev:?}");
    }
    let doc = mkent(&["mk-op", "--canonical", "4"]).json.unwrap();
    let ev = eigenvalues(&doc);
    assert!((ev[0] - 2f64.powf(1.5)).abs() < 1e-12);
    assert!((ev[15] + 2f64.powf(1.5)).abs() < 1e-12);
    assert!((num(&doc["spectral_norm"]) - num(&doc["norm_bound"])).abs() < 1e-12);
}

#[test]
fn mk_op_swapped_settings_reproduce_primed_operator() {
    let dir = TempDir::new().unwrap();
    let settings = dir.path().join("settings.json");
    std::fs::write(&settings, serde_json::to_string(&canonical_settings(3).unwrap()).unwrap()).unwrap();
    let primed = mkent(&["mk-op", path_str(&settings), "--primed", "--dense"]).json.unwrap();
    let swapped = mkent(&["mk-op", path_str(&settings), "--swap", "--dense"]).json.unwrap();
    assert_eq!(primed["operator"], "B'");
    let flat = |d: &Value| -> Vec<f64> {
        d["matrix"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap().clone()).flat_map(|z| [num(&z[0]), num(&z[1])]).collect()
    };
    let (a, b) = (flat(&primed), flat(&swapped));
    assert_eq!(a.len(), 2 * 64);
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn mk_op_limits_and_bad_settings() {
    let run = mkent(&["mk-op", "--canonical", "11", "--dense"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("n ≤ 10"));
    let large = mkent(&["mk-op", "--canonical", "12"]);
    assert_eq!(large.code, 0);
    let doc = large.json.unwrap();
    assert!(doc.get("eigenvalues").is_none());
    assert!(num(&doc["spectral_norm"]) <= num(&doc["norm_bound"]) + 1e-9);

    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "pairs": [{"a": [1, 0, 0], "a_prime": [0, 2, 0]}]}"#).unwrap();
    assert_eq!(mkent(&["mk-op", path_str(&bad)]).code, 2);
    assert_eq!(mkent(&["mk-op"]).code, 2);
}

#[test]
fn selftest_passes_and_detects_injected_failure() {
    for seed in ["0", "17"] {
        let run = mkent(&["selftest", "--seed", seed, "--count", "4"]);
        assert_eq!(run.code, 0, "{:?}", run.json);
        let doc = run.json.unwrap();
        assert_eq!(doc["passed"], true);
        let names: Vec<&str> = doc["suites"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
        assert_eq!(names, ["spectral", "ghz_variance", "oracle_agreement", "fixtures"]);
        assert_eq!(doc["suites"][2]["passed"], 24);
    }
    let run = mkent(&["selftest", "--count", "1", "--inject-failure"]);
    assert_ne!(run.code, 0);
    let doc = run.json.unwrap();
    assert_eq!(doc["passed"], false);
    assert_eq!(doc["suites"][3]["failed"], 1);
}
