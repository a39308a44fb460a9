use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redlight")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_reports_switch_speed() {
    let o = run(&["solve", "--problem", path(&problem("exponential.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["pattern"], "vmax~>el~>beta~>0");
    assert!((v["v_c_star"].as_f64().unwrap() - 86.94).abs() < 0.01);
}

#[test]
fn validate_flags_stopping_infeasible() {
    let text = std::fs::read_to_string(problem("exponential.json")).unwrap().replace("\"d\": 4000", "\"d\": 900");
    let file = scratch("too_close.json");
    std::fs::write(&file, text).unwrap();
    let o = run(&["validate", "--problem", path(&file)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["reasons"][0], "stopping-infeasible");
}

#[test]
fn unknown_fields_name_their_path() {
    let text = std::fs::read_to_string(problem("exponential.json"))
        .unwrap()
        .replace("\"lambda\"", "\"lambda\": 0.1, \"rate\"");
    let file = scratch("unknown_field.json");
    std::fs::write(&file, text).unwrap();
    let o = run(&["solve", "--problem", path(&file)]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["reasons"][0], "schema");
    assert!(v["message"].as_str().unwrap().contains("`distribution`"));
}

#[test]
fn solve_then_evaluate_round_trips() {
    let report = scratch("report.json");
    let o = run(&["solve", "--problem", path(&problem("uniform.json")), "--out", path(&report)]);
    assert_eq!(o.status.code(), Some(0));
    let solved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let o = run(&["evaluate", "--problem", path(&problem("uniform.json")), "--trajectory", path(&report)]);
    assert_eq!(o.status.code(), Some(0));
    let a = solved["expected_arrival"].as_f64().unwrap();
    let b = json(&o)["expected_arrival"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
}

#[test]
fn phase_diagram_shows_the_no_switch_regions() {
    let o =
        run(&["phase-diagram", "--problem", path(&problem("no_switch.json")), "--v0", "0:19.9:40", "--d", "5:400:40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("v0,d,pattern,cost"));
    let labels: std::collections::BTreeSet<&str> = lines.map(|l| l.split(',').nth(2).unwrap()).collect();
    for want in ["beta~>el~>0", "alpha~>el~>0", "alpha~>vmax~>el~>0"] {
        assert!(labels.contains(want), "{labels:?}");
    }
    let allowed = ["beta~>el~>0", "alpha~>el~>0", "alpha~>vmax~>el~>0", "el~>0", "beta~>0", "infeasible"];
    assert!(labels.iter().all(|l| allowed.contains(l)), "{labels:?}");
}

#[test]
fn sweep_emits_one_row_per_point() {
    let o = run(&["sweep-vc", "--problem", path(&problem("exponential.json")), "--points", "401"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("v_c,expected_cost"));
    assert_eq!(text.lines().count(), 402);
}

#[test]
fn oracles_are_reproducible() {
    let file = problem("exponential.json");
    let args = ["oracle", "perturb", "--problem", path(&file), "--n", "100", "--seed", "9"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(json(&a)["min_delta"].as_f64().unwrap() >= -1e-7);
}

#[test]
fn dp_oracle_writes_report_and_curve() {
    let csv = scratch("dp.csv");
    let o = run(&[
        "oracle",
        "dp",
        "--problem",
        path(&problem("uniform.json")),
        "--dt",
        "0.4",
        "--dv",
        "2",
        "--csv",
        path(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["steps"], 200);
    assert!(v["cost"].as_f64().unwrap() >= v["solver_cost"].as_f64().unwrap() * (1.0 - 1e-9));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 202);
}

#[test]
fn excess_law_has_no_closed_form() {
    let o = run(&["solve", "--problem", path(&problem("excess.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["reasons"][0], "unsupported-distribution");
    let o = run(&["validate", "--problem", path(&problem("excess.json"))]);
    assert_eq!(o.status.code(), Some(0));
}
