use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qeraser(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qeraser")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = qeraser(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_streams_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    ok(&["simulate", "--config", "vienna-II", "--seed", "7", "--out", p(&run), "--dwell", "0.05", "--parts", "scan"]);
    assert!(run.join("scan.system.tags").is_file());
    assert!(run.join("scan.environment.tags").is_file());
    let manifest = fs::read_to_string(run.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 7"));
    assert!(manifest.contains("[experiment.scenario]"), "scenario must be inlined");

    // The manifest alone reproduces the run byte for byte.
    let again = dir.path().join("again");
    ok(&["simulate", "--config", p(&run.join("manifest.toml")), "--out", p(&again)]);
    for f in ["scan.system.tags", "scan.environment.tags", "manifest.toml"] {
        assert_eq!(fs::read(run.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_seed_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = qeraser_core::config::ExperimentConfig::bundled("vienna-II").unwrap();
    let cfg = qeraser_core::config::ExperimentConfig { seed: None, ..text };
    let path = dir.path().join("noseed.toml");
    fs::write(&path, cfg.to_toml()).unwrap();
    let out = qeraser(&["simulate", "--config", p(&path), "--out", p(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "name = 3\n").unwrap();
    assert_eq!(qeraser(&["simulate", "--config", p(&bad), "--out", p(&dir.path().join("y"))]).status.code(), Some(2));
}

#[test]
fn canaries_environment_arm_is_suppressed() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&[
        "simulate", "--config", "canaries-II", "--out", p(dir.path()), "--dwell", "0.1", "--parts", "scan",
    ]);
    let line = stdout.lines().find(|l| l.trim_start().starts_with("scan")).unwrap();
    let dbs: Vec<f64> = line
        .split('(')
        .skip(1)
        .map(|s| s.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert!((dbs[0] + 35.0).abs() < 0.5, "environment arm {} dB", dbs[0]);
    assert!((dbs[1] + 38.0).abs() < 1.0, "coincidences {} dB", dbs[1]);
}

#[test]
fn analyze_eom_off_shows_welcher_weg_and_no_fringes() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path();
    ok(&["simulate", "--config", "vienna-II", "--out", p(run), "--eom", "off", "--dwell", "0.3", "--blocking-dwell", "3"]);
    ok(&["analyze", p(run)]);
    let r = json(&run.join("analysis.json"));
    let v = r["probabilities"].as_array().unwrap().iter().find(|p| p["condition"]["port"] == "minus").unwrap();
    let i = v["welcher_weg"]["value"].as_f64().unwrap();
    assert!((0.94..=0.99).contains(&i), "I = {i}");
    for f in r["fringes"].as_array().unwrap() {
        assert!(f["visibility"]["value"].as_f64().unwrap() < 0.1, "flat fringes expected: {f}");
    }
    assert!(r["erasure"].is_null());
    assert!(run.join("coincidences_scan.csv").is_file());
    assert!(run.join("fringes.csv").is_file());
}

#[test]
fn analyze_eom_on_shows_pi_shifted_fringes() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    ok(&["simulate", "--config", "vienna-II", "--out", p(&run), "--dwell", "1", "--parts", "scan"]);
    let out = dir.path().join("analysis");
    ok(&["analyze", p(&run), "--out", p(&out)]);
    let r = json(&out.join("analysis.json"));
    let e = &r["erasure"];
    assert_eq!(e["pi_shifted"], true);
    let v = e["visibility_plus"]["value"].as_f64().unwrap();
    assert!((0.88..=1.0).contains(&v), "V = {v}");
    let svg = fs::read_to_string(out.join("fringe_R.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));

    // Identical inputs give byte-identical CSV outputs.
    let out2 = dir.path().join("analysis2");
    ok(&["analyze", p(&run), "--out", p(&out2)]);
    for f in ["fringes.csv", "coincidences_scan.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(out2.join(f)).unwrap());
    }

    // A narrower window keeps fewer coincidences.
    let out3 = dir.path().join("narrow");
    ok(&["analyze", p(&run), "--out", p(&out3), "--window-ps", "200"]);
    let n = |d: &Path| json(&d.join("analysis.json"))["parts"][0]["coincidences"].as_u64().unwrap();
    assert!(n(&out3) < n(&out));
}

#[test]
fn corrupt_streams_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path();
    ok(&["simulate", "--config", "vienna-II", "--out", p(run), "--dwell", "0.02", "--parts", "scan"]);
    let path = run.join("scan.environment.tags");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("12,9,0,0,-\n");
    fs::write(&path, text).unwrap();
    let out = qeraser(&["analyze", p(run)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_spacetime_reports_relations() {
    let stdout = ok(&["verify-spacetime"]);
    assert_eq!(stdout.matches("scenario ").count(), 9);
    assert!(!stdout.contains("FAIL"));
    let s = ok(&["verify-spacetime", "--scenario", "canaries-II'"]);
    assert!(s.contains("96.03 c"), "{s}");
    assert_eq!(ok(&["verify-spacetime", "--scenario", "canaries-IIp"]), s);
    let s = ok(&["verify-spacetime", "--scenario", "canaries-III"]);
    assert!(s.contains("P_e  spacelike I_s") && s.contains("I_s  after     C_e") && s.contains("E_se after     C_e"), "{s}");

    let out = qeraser(&["verify-spacetime", "--scenario", "vienna-VII"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("vienna-II") && err.contains("canaries-II'"), "{err}");
}

#[test]
fn wrong_expectation_is_a_verification_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = qeraser_core::spacetime::ScenarioConfig::bundled("vienna-II").unwrap();
    let text = toml::to_string(&cfg).unwrap().replacen("relation = \"spacelike\"", "relation = \"before\"", 1);
    let path = dir.path().join("broken.toml");
    fs::write(&path, text).unwrap();
    let out = qeraser(&["verify-spacetime", "--scenario", p(&path), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("spacetime.csv")).unwrap();
    assert!(csv.starts_with("scenario,event_a,event_b,expected,actual,pass"));
    assert!(csv.contains("false"));
}

#[test]
fn sweep_and_report_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("sweep");
    ok(&[
        "sweep", "--config", "vienna-ideal", "--out", p(&s), "--dwell", "0.2", "--blocking-dwell", "2", "--fractions",
        "0,0.5,1",
    ]);
    let csv = fs::read_to_string(s.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(fs::read_to_string(s.join("complementarity.svg")).unwrap().contains("I² + V² = 1"));

    let r = dir.path().join("report");
    ok(&["report", "--config", "vienna-II", "--out", p(&r), "--dwell", "0.2", "--blocking-dwell", "2", "--no-sweep"]);
    let md = fs::read_to_string(r.join("report.md")).unwrap();
    assert!(md.contains("| I |") && md.contains("canaries-II'"));
    let res = json(&r.join("results.json"));
    assert_eq!(res["spacetime_passed"], true);
}
