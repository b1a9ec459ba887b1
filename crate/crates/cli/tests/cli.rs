use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evsched_core::harness::fixture_ex1;
use tempfile::TempDir;

fn evsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ex1(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("ex1.json");
    std::fs::write(&path, fixture_ex1().to_json()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_reports_fifty_one_compact_rows() {
    let dir = TempDir::new().unwrap();
    let path = ex1(&dir);
    let o = evsched(&["build", "--formulation", "compact", s(&path)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("changeover constraints: 51"), "{}", stdout(&o));

    let o = evsched(&["build", "--formulation", "legacy", "--json", s(&path)]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["changeover_constraints"], 102);
    assert_eq!(v["x_variables"], 18);
}

#[test]
fn compare_prints_match() {
    let dir = TempDir::new().unwrap();
    let path = ex1(&dir);
    let csv = dir.path().join("cmp.csv");
    let o = evsched(&["compare", s(&path), "--out", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("MATCH") && !out.contains("MISMATCH"), "{out}");
    assert!(out.contains("legacy") && out.contains("compact"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("key,match"));
}

#[test]
fn broken_instance_exits_two() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    let mut inst = fixture_ex1();
    inst.tasks[0].unit = "NOPE".into();
    inst.n_max = 0;
    std::fs::write(&path, inst.to_json()).unwrap();
    let o = evsched(&["validate", s(&path)]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("violation"), "{err}");
    assert!(err.contains("NOPE") || err.contains("A"), "{err}");

    let o = evsched(&["validate", "--json", s(&path)]);
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["valid"], false);
    assert!(v["violations"].as_array().unwrap().len() >= 2);

    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(code(&evsched(&["validate", s(&path)])), 2);
    assert_eq!(code(&evsched(&["solve", s(&path)])), 2);
}

#[test]
fn valid_instance_validates() {
    let dir = TempDir::new().unwrap();
    let o = evsched(&["validate", s(&ex1(&dir))]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("valid"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&evsched(&[])), 1);
    assert_eq!(code(&evsched(&["frobnicate"])), 1);
    let dir = TempDir::new().unwrap();
    let path = ex1(&dir);
    assert_eq!(code(&evsched(&["build", "--formulation", "cubic", s(&path)])), 1);
    // Window mechanisms belong to one formulation each.
    let o = evsched(&["build", "--formulation", "compact", "--windows", "assign", s(&path)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("cannot be combined"));
    assert_eq!(code(&evsched(&["build", "/does/not/exist.json"])), 1);
    assert_eq!(code(&evsched(&["--help"])), 0);
}

#[test]
fn solve_prints_schedule_and_verification() {
    let dir = TempDir::new().unwrap();
    let path = ex1(&dir);
    let sol = dir.path().join("sol.json");
    let o = evsched(&[
        "solve",
        "--formulation",
        "compact",
        "--windows",
        "explicit",
        s(&path),
        "--out",
        s(&sol),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("status optimal"), "{out}");
    assert!(out.contains("CH1"), "{out}");
    assert!(out.contains("win_pick") && !out.contains("FAIL"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(v["status"], "optimal");
    assert!(v["values"].as_object().unwrap().contains_key("wv(A,1)"));
}

#[test]
fn solve_json_mirrors_text() {
    let dir = TempDir::new().unwrap();
    let o = evsched(&["solve", "--formulation", "legacy", "--json", s(&ex1(&dir))]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let obj = v["objective_vector"].as_array().unwrap();
    assert!(obj[0].as_f64().unwrap().abs() < 1e-6);
    assert!((obj[1].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(v["schedule"]["verification"]["checks"].is_array());
}

#[test]
fn node_limit_exits_three() {
    let dir = TempDir::new().unwrap();
    let o = evsched(&["solve", "--formulation", "legacy", "--max-nodes", "0", s(&ex1(&dir))]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
}

#[test]
fn export_writes_mps_and_lp() {
    let dir = TempDir::new().unwrap();
    let path = ex1(&dir);
    let mps = dir.path().join("m.mps");
    let o = evsched(&["export", s(&path), "--format", "mps", "--out", s(&mps)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&mps).unwrap();
    let back = evsched_core::parse_mps(&text).unwrap();
    let direct = evsched_core::compile(
        &fixture_ex1(),
        evsched_core::CompileOptions::new(evsched_core::Formulation::Compact, evsched_core::WindowMode::None),
    )
    .unwrap();
    assert_eq!(back.canonical(), direct.model.canonical());

    let o = evsched(&["export", s(&path), "--format", "lp", "--formulation", "legacy"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(
        out.contains("Subject To") && out.contains("Binary") && out.contains("End"),
        "{out}"
    );
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("growth.csv");
    let o = evsched(&["sweep", "--grid", "4,8,16x3,8", "--seed", "5", "--out", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("14340"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 7);

    let o = evsched(&["sweep", "--grid", "16x8", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["points"][0]["legacy"], 14340);
    assert_eq!(v["points"][0]["compact"], 608);
    assert_eq!(code(&evsched(&["sweep", "--grid", "oops"])), 1);
}

#[test]
fn rolling_runs_the_builtin_month() {
    let o = evsched(&["rolling", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let horizons = v["result"]["horizons"].as_array().unwrap();
    assert_eq!(horizons.len(), 4);
    for w in horizons.windows(2) {
        assert_eq!(w[0]["stock_out"], w[1]["stock_in"]);
    }
}

#[test]
fn rolling_reads_a_plan_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("plan.json");
    let mut month = evsched_core::harness::synthetic_month();
    month.demands.truncate(1);
    std::fs::write(&path, serde_json::to_string(&month).unwrap()).unwrap();
    let o = evsched(&["rolling", s(&path), "--formulation", "legacy"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("horizon 1"), "{}", stdout(&o));

    month.period_h = 30.0;
    std::fs::write(&path, serde_json::to_string(&month).unwrap()).unwrap();
    assert_eq!(code(&evsched(&["rolling", s(&path)])), 2);
}

#[test]
fn runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = ex1(&dir);
    let a = evsched(&["solve", "--json", s(&path)]);
    let b = evsched(&["solve", "--json", s(&path)]);
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
        v["stats"]["wall_seconds"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b));
}
