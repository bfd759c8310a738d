use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn unitcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitcert"))
        .args(args)
        .env_remove("UNITCERT_MAX_BRANCHES")
        .output()
        .expect("run unitcert")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("UTF-8 temp path")
}

fn witness(dir: &TempDir, p: &str, q: &str, strategy: &str) -> PathBuf {
    let out = dir.path().join(format!("{p}-{q}-{strategy}.json"));
    let o = unitcert(&["witness", "--p", p, "--q", q, "--strategy", strategy, "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn unit_witness_has_two_points() {
    let dir = TempDir::new().unwrap();
    let f = witness(&dir, "1", "1", "default");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(v["nodes"][0]["points"].as_array().unwrap().len(), 2);
    assert_eq!(v["metadata"]["target"], "1/1");
}

#[test]
fn verify_both_modes_pass_on_emitted_documents() {
    let dir = TempDir::new().unwrap();
    for (p, q, s) in [("3", "1", "sqrt3-peephole"), ("4", "1", "default"), ("3", "1", "default")] {
        let f = witness(&dir, p, q, s);
        let o = unitcert(&["verify", path_str(&f), "--mode", "both"]);
        assert!(o.status.success(), "{p}/{q}: {}", stderr(&o));
        assert!(stdout(&o).contains(&format!("oracle: Forced({p}/{q})")), "{}", stdout(&o));
    }
}

#[test]
fn corrupted_documents_fail_verification() {
    let dir = TempDir::new().unwrap();
    let f = witness(&dir, "3", "1", "sqrt3-peephole");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    v["nodes"][0]["points"][3]["coords"][0] = Value::String("1/3".into());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = unitcert(&["verify", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("edge"), "{}", stderr(&o));

    std::fs::write(&bad, "{ not json").unwrap();
    let o = unitcert(&["verify", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identities_report_the_linkage_form() {
    let o = unitcert(&["identities", "--n-max", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("ok    linkage-a-b-e-f: -2*(e-16+3*c)^2"), "{out}");
    assert!(out.contains("regular-simplex n=4"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn propagate_prints_result_and_trace() {
    let dir = TempDir::new().unwrap();
    let f = witness(&dir, "3", "1", "sqrt3-peephole");
    let o = unitcert(&["propagate", path_str(&f), "--target", "0,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("Forced(3/1)"), "{out}");
    assert!(out.contains("zero-collapse"));

    let o = unitcert(&["propagate", path_str(&f), "--target", "0,1", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"]["kind"], "forced");
    assert_eq!(v["outcome"]["value"], "3/1");

    let o = unitcert(&["propagate", path_str(&f), "--target", "0,99"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn branch_cap_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let f = witness(&dir, "3", "1", "default");
    let o = Command::new(env!("CARGO_BIN_EXE_unitcert"))
        .args(["propagate", path_str(&f), "--target", "0,1"])
        .env("UNITCERT_MAX_BRANCHES", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("Capped"));
}

#[test]
fn size_limit_skips_the_flat_check() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.json");
    let o = unitcert(&["witness", "--p", "3", "--q", "1", "--limit", "5", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("flat expansion skipped"));
    let o = unitcert(&["verify", path_str(&out), "--mode", "oracle", "--limit", "5"]);
    assert_eq!(o.status.code(), Some(3));
    let dot = dir.path().join("w.dot");
    let o = unitcert(&["witness", "--p", "3", "--q", "1", "--limit", "5", "--out", path_str(&out), "--dot", path_str(&dot)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dot_export() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.json");
    let dot = dir.path().join("w.dot");
    let o = unitcert(&["witness", "--p", "3", "--q", "1", "--strategy", "sqrt3-peephole", "--out", path_str(&out), "--dot", path_str(&dot)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("graph witness {"));
    assert_eq!(text.matches(" -- ").count(), 12);
}

#[test]
fn counterexample_demo() {
    let dir = TempDir::new().unwrap();
    let pts = dir.path().join("pts.json");
    std::fs::write(&pts, r#"[[["0","0"],["0","0"]], [["1","1"],["0","0"]], [["0","1"],["0","0"]], [["0","1"],["0","1"]]]"#).unwrap();
    let o = unitcert(&["counterexample", "--m", "2", "--points", path_str(&pts)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rational_preserved"], true);
    let viol = &v["violations"][0];
    assert_eq!((viol["i"].as_u64(), viol["j"].as_u64()), (Some(0), Some(1)));
    assert_eq!(viol["before"], "3/1 + 2/1*sqrt(2)");
    assert_eq!(viol["after"], "3/1 + -2/1*sqrt(2)");

    let o = unitcert(&["counterexample", "--m", "4", "--points", path_str(&pts)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_reports_sizes() {
    let dir = TempDir::new().unwrap();
    let f = witness(&dir, "4", "1", "default");
    let o = unitcert(&["stats", path_str(&f)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dag_nodes"], 2);
    assert_eq!(v["flat_points"], 11);
    assert_eq!(v["tower_depth"], 2);
    assert_eq!(v["recursion_depth"], 1);
}

#[test]
fn help_documents_flags() {
    let o = unitcert(&["witness", "--help"]);
    let out = stdout(&o);
    for flag in ["--p", "--q", "--strategy", "--limit", "--out", "--dot"] {
        assert!(out.contains(flag), "{flag} missing from help");
    }
    let o = unitcert(&["verify", "--help"]);
    assert!(stdout(&o).contains("UNITCERT_MAX_BRANCHES"));
}

#[test]
fn bad_input_exits_two() {
    let o = unitcert(&["witness", "--p", "0", "--q", "1", "--out", "/nonexistent/x.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = unitcert(&["verify", "/nonexistent/file.json"]);
    assert_eq!(o.status.code(), Some(2));
}
