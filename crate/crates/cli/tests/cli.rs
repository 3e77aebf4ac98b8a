use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subsharp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

fn report(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).expect("json report");
    v[0].clone()
}

fn bound(r: &Value, notion: &str) -> Option<f64> {
    r["fits"]
        .as_array()?
        .iter()
        .find(|f| f["notion"] == notion)
        .and_then(|f| f["bound"].as_f64())
}

#[test]
fn greedy_modular_picks() {
    let out = run(&["greedy", "--family", "modular", "--weights", "3,2,1,1", "-k", "2"]);
    assert_eq!(code(&out), 0);
    let line = &json_lines(&out)[0];
    assert_eq!(line["picks"], serde_json::json!([0, 1]));
    assert_eq!(line["values"], serde_json::json!([0.0, 3.0, 5.0]));
    let lazy = run(&["greedy", "--family", "modular", "--weights", "3,2,1,1", "-k", "2", "--lazy"]);
    assert_eq!(json_lines(&lazy)[0]["picks"], line["picks"]);
}

#[test]
fn budget_above_n_is_usage_error() {
    let out = run(&["greedy", "--family", "modular", "--weights", "3,2,1,1", "-k", "5"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn analyze_truncation() {
    let out = run(&["analyze", "--family", "truncation", "-k", "5"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert!(bound(&r, "monotonic").unwrap() >= 0.999);
    assert_eq!(r["greedy_ratio"], 1.0);
    let c = r["curvature"]["bound"].as_f64().unwrap();
    assert!((c - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
}

#[test]
fn analyze_coverage() {
    let out = run(&["analyze", "--family", "nwf-coverage", "-k", "3"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["opt"], 27.0);
    assert_eq!(r["worst_tie_value"], 19.0);
    let c = r["curvature"]["bound"].as_f64().unwrap();
    assert!((c - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    assert!((bound(&r, "monotonic").unwrap() - 19.0 / 27.0).abs() < 1e-9);
}

#[test]
fn curvature_only() {
    let out = run(&["analyze", "--family", "truncation", "-k", "3", "--notions", "curvature", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "k,opt,greedy_ratio,worst_tie_ratio,curvature_bound,optima_count,queries"
    );
    let json = run(&["analyze", "--family", "truncation", "-k", "3", "--notions", "curvature"]);
    let r = report(&json);
    assert_eq!(r["fits"], serde_json::json!([]));
    assert!(r.get("floors").is_none());
}

#[test]
fn unknown_notion_is_usage_error() {
    let out = run(&["analyze", "--family", "truncation", "-k", "3", "--notions", "bogus"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn oversized_instance_is_resource_error() {
    let out = run(&["analyze", "--family", "truncation", "-k", "3", "-n", "30"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn missed_guarantee_exits_3() {
    // The approximate guarantee at delta > 0 overshoots greedy here.
    let out = run(&[
        "analyze", "--family", "nwf_coverage", "-k", "2", "--delta", "0.2", "--notions", "approximate",
    ]);
    assert_eq!(code(&out), 3);
    assert!(!out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("approximate"));
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "experiment",
            "--family",
            "facility_location",
            "--k-min",
            "5",
            "--k-max",
            "8",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn experiment_repeats() {
    let out = run(&[
        "experiment", "--family", "truncation", "--k-min", "2", "--k-max", "3", "--repeats", "2",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let ks: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks, ["2", "2", "3", "3"]);
}

#[test]
fn missing_ratings_file() {
    let out = run(&[
        "experiment",
        "--family",
        "facility_location",
        "--ratings",
        "/nonexistent/ratings.csv",
        "--k-min",
        "2",
        "--k-max",
        "3",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn ratings_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    std::fs::write(&path, "a,b,c,d\n5,1,0,2\n3,4,1,0\n0,0,5,1\n").unwrap();
    let out = run(&[
        "analyze",
        "--family",
        "facility_location",
        "--ratings",
        path.to_str().unwrap(),
        "--header",
        "-k",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["elements"], serde_json::json!([0, 1, 2, 3]));
}

#[test]
fn construct_linear() {
    let out = run(&["construct-linear", "--c", "1", "--theta", "1", "-k", "2"]);
    assert_eq!(code(&out), 0);
    let lines = json_lines(&out);
    assert_eq!(lines[0]["weights"], serde_json::json!([0.5, 0.5]));
    assert_eq!(lines[1]["verified"], true);

    let out = run(&["construct-linear", "--c", "1", "--theta", "0.5", "-k", "5"]);
    assert_eq!(code(&out), 0);
    let lines = json_lines(&out);
    assert_eq!(lines[0]["weights"].as_array().unwrap().len(), 5);
    assert_eq!(lines[1]["verified"], true);

    let out = run(&["construct-linear", "--c", "1", "--theta", "0", "-k", "2"]);
    assert_eq!(code(&out), 2);
    let out = run(&["construct-linear", "--c", "1", "--theta", "0.001", "-k", "5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("l = 1"));
}

#[test]
fn validate_command() {
    let out = run(&["validate", "--family", "concave_modular", "--alpha", "0.5", "-k", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_lines(&out)[0]["passed"], true);
}

#[test]
fn spec_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(
        &path,
        r#"{"family":"modular","params":{"weights":[3,2,1,1]},"n":4,"k":2,"seed":1,"grid":{"c_max":2.0,"c_step":0.1}}"#,
    )
    .unwrap();
    let spec = path.to_str().unwrap();
    let out = run(&["analyze", "--spec", spec]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["instance"]["grid"]["c_max"], 2.0);
    assert_eq!(r["opt"], 5.0);
    let out = run(&["analyze", "--spec", spec, "--c-max", "1.5"]);
    assert_eq!(report(&out)["instance"]["grid"]["c_max"], 1.5);
    let out = run(&["greedy", "--spec", spec, "-k", "3"]);
    assert_eq!(json_lines(&out)[0]["picks"], serde_json::json!([0, 1, 2]));
    assert!(Path::new(spec).exists());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{").unwrap();
    assert_eq!(code(&run(&["analyze", "--spec", bad.to_str().unwrap()])), 2);
}
