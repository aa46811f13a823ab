use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const E22: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/E-n22-k4.vrp");

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mscvrp")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["solve"]).status.code(), Some(2));
    assert_eq!(run(&["features", "--instance", E22, "--solution", "x", "--label", "3"]).status.code(), Some(2));
}

#[test]
fn missing_inputs_exit_3() {
    assert_eq!(run(&["solve", "--instance", "/nonexistent.vrp"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.vrp");
    fs::write(&bad, "NAME : bad\nDIMENSION : 3\n").unwrap();
    assert_eq!(run(&["solve", "--instance", p(&bad)]).status.code(), Some(3));
    assert_eq!(
        run(&["bench", "--instances", p(dir.path()), "--bks", "/nope.csv", "--out", "x.csv"]).status.code(),
        Some(3)
    );
}

#[test]
fn solve_then_features() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("e22.sol");
    let trace = dir.path().join("trace.json");
    let bks = dir.path().join("bks.csv");
    fs::write(&bks, "instance,bks\nE-n22-k4,375\n").unwrap();
    let out = run(&[
        "solve", "--instance", E22, "--max-iterations", "200", "--seed", "2", "--sol-out", p(&sol),
        "--trace", p(&trace), "--bks", p(&bks),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.starts_with("E-n22-k4 cost "), "{line}");
    assert!(line.contains(" gap "));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(json["events"].as_array().is_some_and(|e| !e.is_empty()));

    let data = dir.path().join("data.csv");
    for label in ["1", "0"] {
        let out = run(&["features", "--instance", E22, "--solution", p(&sol), "--label", label, "--out", p(&data)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = fs::read_to_string(&data).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("i01,"));
    assert!(lines.iter().all(|l| l.split(',').count() == 32));
}

#[test]
fn bench_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let inst_dir = dir.path().join("inst");
    fs::create_dir(&inst_dir).unwrap();
    fs::copy(E22, inst_dir.join("E-n22-k4.vrp")).unwrap();
    let bks = dir.path().join("bks.csv");
    fs::write(&bks, "instance,bks\nE-n22-k4,375\n").unwrap();
    let report = dir.path().join("report.csv");
    let json = dir.path().join("report.json");
    let out = run(&[
        "bench", "--instances", p(&inst_dir), "--bks", p(&bks), "--runs", "2", "--max-iterations", "30",
        "--time-limit", "60", "--modes", "plain,guided-nopr", "--out", p(&report), "--json", p(&json),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().next().unwrap(), "instance,mode,avg_cost,best_cost,avg_gap,best_gap");
    assert_eq!(text.lines().count(), 3);
    assert!(fs::metadata(&json).unwrap().len() > 0);

    let out = run(&["compare", "--a", p(&report), "--b", p(&report), "--mode-a", "plain", "--mode-b", "guided-nopr"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("pairs 1 "), "{stdout}");
    assert!(stdout.contains("no test: "));
}
