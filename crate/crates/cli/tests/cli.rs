use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ladlag(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ladlag"))
        .args(args)
        .args(["--out", out.to_str().unwrap(), "--n-samples", "20000", "--n-paths", "4000"])
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(out: &Path, args: &[&str]) {
    let o = ladlag(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(2).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn calibration_is_byte_identical_across_runs_and_dirs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(a.path(), &["calibrate", "--seed", "3", "--eta", "0,3,predictable"]);
    let first = fs::read(a.path().join("calibration.json")).unwrap();
    ok(a.path(), &["calibrate", "--seed", "3", "--eta", "0,3,predictable"]);
    ok(b.path(), &["calibrate", "--seed", "3", "--eta", "0,3,predictable"]);
    assert_eq!(first, fs::read(a.path().join("calibration.json")).unwrap());
    assert_eq!(first, fs::read(b.path().join("calibration.json")).unwrap());
    ok(b.path(), &["calibrate", "--seed", "4", "--eta", "0,3,predictable"]);
    assert_ne!(first, fs::read(b.path().join("calibration.json")).unwrap());
}

#[test]
fn simulate_needs_a_cache_or_the_flag() {
    let d = tempfile::tempdir().unwrap();
    let o = ladlag(d.path(), &["simulate", "--eta", "3"]);
    assert!(!o.status.success());
    let diag = json(&d.path().join("error.json"));
    assert!(diag["error"].as_str().unwrap().contains("calibrat"), "{diag}");
    ok(d.path(), &["simulate", "--eta", "3", "--calibrate"]);
    assert!(d.path().join("trajectories_3.csv").exists());
}

#[test]
fn trajectories_show_the_regime_signatures() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["simulate", "--seed", "7", "--eta", "optional,3,predictable", "--calibrate"]);
    let text = fs::read_to_string(d.path().join("trajectories_inf.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# ladlag "));
    assert_eq!(lines.next().unwrap(), "time,p_tilde,p_eta,barrier_at,barrier_right,c_left,c_at,c_right,detected");

    for row in rows(&d.path().join("trajectories_inf.csv")).iter().skip(1) {
        assert_eq!(row[5], row[6], "predictable control jumps at an event: {row:?}");
        assert_eq!(row[8], "false");
    }
    let optional = rows(&d.path().join("trajectories_0.csv"));
    let f = |s: &String| s.parse::<f64>().unwrap();
    let first_right = optional.iter().find(|r| f(&r[7]) > f(&r[6])).expect("the scenario crosses b");
    assert!(f(&first_right[5]) < 0.0);
    assert_eq!(f(&first_right[6]), 0.0);

    let times: Vec<f64> = optional.iter().map(|r| f(&r[0])).collect();
    assert!(times.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn unknown_config_keys_fail() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 1, "modle": {}}"#).unwrap();
    let o = ladlag(d.path(), &["toy", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("modle"));
}

#[test]
fn flags_override_the_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 1, "toy": {"etas": [0, 0.5], "n_paths": 10}}"#).unwrap();
    ok(d.path(), &["toy", "--config", cfg.to_str().unwrap(), "--seed", "2"]);
    let text = fs::read_to_string(d.path().join("toy.csv")).unwrap();
    assert!(text.lines().next().unwrap().ends_with("seed=2"));
    assert_eq!(text.lines().nth(1).unwrap(), "eta,exact,mc_mean,mc_se");
    // --n-paths beats the file's 10
    let mc_se: f64 = text.lines().nth(2).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(mc_se < 0.01);
    assert_eq!(rows(&d.path().join("toy.csv")).len(), 2);
}

#[test]
fn unit_jump_model_calibrates_to_one() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    let model = r#"{"model": {"p_tilde": 0, "r": 1, "lambda": 1, "c0": 0, "law": {"discrete": [{"value": 1, "prob": 1}]}}, "etas": ["predictable"]}"#;
    fs::write(&cfg, model).unwrap();
    ok(d.path(), &["calibrate", "--config", cfg.to_str().unwrap()]);
    let c = &json(&d.path().join("calibration.json"))["constants"];
    let (b, se) = (c["b"].as_f64().unwrap(), c["b_se"].as_f64().unwrap());
    assert!((b - 1.0).abs() <= 3.0 * se, "b = {b} ± {se}");
}

#[test]
fn values_are_sorted_and_stamped() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["value", "--eta", "predictable,6,0", "--calibrate"]);
    let text = fs::read_to_string(d.path().join("values.csv")).unwrap();
    assert!(text.starts_with("# ladlag 0.1.0 config_hash="));
    assert_eq!(text.lines().nth(1).unwrap(), "eta,v_mc,se_mc,v_closed_form,se_closed_form");
    let etas: Vec<String> = rows(&d.path().join("values.csv")).into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(etas, ["0", "6", "inf"]);
}

#[test]
fn selfcheck_passes_then_names_a_corrupted_table() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["calibrate", "--eta", "0,3,predictable"]);
    ok(d.path(), &["selfcheck", "--eta", "0,3,predictable"]);
    let v = json(&d.path().join("selfcheck.json"));
    assert_eq!(v["passed"], true);
    assert_eq!(v["table_source"], "cache");

    let path = d.path().join("calibration.json");
    let mut cal = json(&path);
    let table = cal["tables"].as_array_mut().unwrap().iter_mut().find(|t| t["table"]["eta"] == 3.0).unwrap();
    let levels = table["table"]["level0"].as_array_mut().unwrap();
    levels.reverse();
    fs::write(&path, serde_json::to_string(&cal).unwrap()).unwrap();

    let o = ladlag(d.path(), &["selfcheck", "--eta", "0,3,predictable"]);
    assert!(!o.status.success());
    let v = json(&d.path().join("selfcheck.json"));
    assert_eq!(v["passed"], false);
    let failed: Vec<&Value> = v["suites"].as_array().unwrap().iter().filter(|s| s["passed"] == false).collect();
    assert!(failed.iter().any(|s| s["name"] == "barrier_shape:3" && s["detail"].as_str().unwrap().contains("monotonicity")), "{failed:?}");
}
