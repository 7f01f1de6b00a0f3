use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn qres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qres")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lcu_cost_reports_json_lines() {
    let h2 = fixture("h2_eq.fcidump");
    let out = qres(&["lcu-cost", "--method", "ac-si", path(&h2), path(&h2)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], lines[1]);
    let v: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(v["method"], "ac-si");
    assert_eq!(v["molecule"], "h2");
    assert!(v["lambda"].as_f64().unwrap() >= v["half_spectral_range"].as_f64().unwrap());
    assert_eq!(v["units"]["lambda"], "hartree");
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let h4 = fixture("h4_chain_eq.fcidump");
    let mut files = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.jsonl"));
        for args in [
            vec!["qcc", "--nent", "10,20", "--seed", "7"],
            vec!["trotter-cost", "--method", "lr-lcu"],
            vec!["measure-cost", "--method", "lr-f3"],
        ] {
            let mut a = args.clone();
            a.extend(["--out", path(&out), path(&h4)]);
            assert!(qres(&a).status.success());
        }
        files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(String::from_utf8_lossy(&files[0]).lines().count(), 3);
}

#[test]
fn missing_fixture_exits_2_with_error_record() {
    let out = qres(&["measure-cost", "--method", "fc-si", "does/not/exist.fcidump"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "IoError");
    assert_eq!(v["fixture"], "does/not/exist.fcidump");
}

#[test]
fn solver_errors_exit_3() {
    // qubit-only input with an impossible sector: no states to solve in
    let dir = tempfile::tempdir().unwrap();
    let toy = dir.path().join("toy_x.pauli");
    std::fs::write(&toy, "-1.0 ZI\n0.5 XX\n").unwrap();
    let out = qres(&["exact", "--sector", "ne=3", path(&toy)]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn exact_on_pauli_toy() {
    let dir = tempfile::tempdir().unwrap();
    let toy = dir.path().join("toy_z.pauli");
    std::fs::write(&toy, "-1.0 Z\n").unwrap();
    let out = qres(&["exact", "--k", "1", path(&toy)]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["energies"][0].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn dumped_pauli_reloads_to_the_same_cost() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let h2 = fixture("h2_eq.fcidump");
    assert!(qres(&["lcu-cost", "--method", "ac-si", "--dump-pauli", "--out", path(&out), path(&h2)]).status.success());
    let dumped = dir.path().join("h2_eq.pauli");
    assert!(qres(&["lcu-cost", "--method", "ac-si", "--out", path(&out), path(&dumped)]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let l: Vec<f64> =
        text.lines().map(|l| serde_json::from_str::<Value>(l).unwrap()["lambda"].as_f64().unwrap()).collect();
    assert!((l[0] - l[1]).abs() < 1e-12);
}

#[test]
fn report_collates_cells_into_csv() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl = dir.path().join("cells.jsonl");
    let csv = dir.path().join("table.csv");
    let h2 = fixture("h2_eq.fcidump");
    for m in ["ac-si", "lr"] {
        assert!(qres(&["lcu-cost", "--method", m, "--out", path(&jsonl), path(&h2)]).status.success());
    }
    assert!(qres(&["report", path(&jsonl), "--out", path(&csv)]).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], &["molecule", "geometry", "method"]);
    assert!(header.contains(&"lambda"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("h2,eq,ac-si"));
    assert!(rows[1].starts_with("h2,eq,lr"));
}

#[test]
fn unsupported_method_is_an_input_error() {
    let out = qres(&["trotter-cost", "--method", "ac-si", path(&fixture("h2_eq.fcidump"))]);
    assert_eq!(out.status.code(), Some(2));
}
