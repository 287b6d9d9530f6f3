use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn liezeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liezeta")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn every_report_has_the_common_fields() {
    for args in [
        &["lattice", "validate"][..],
        &["lattice", "killing"],
        &["zeta", "abscissa"],
        &["transitions", "--q", "3", "--class", "Reg"],
        &["shadow", "scan", "--element", "builtin:z"],
    ] {
        let out = liezeta(args);
        assert!(out.status.success(), "{args:?}");
        let v = json_of(&out);
        for key in ["command", "params", "verdicts", "runtime_ms"] {
            assert!(v.get(key).is_some(), "{args:?} lacks {key}");
        }
    }
}

#[test]
fn census_q3_matches_the_table() {
    let out = liezeta(&["census", "--q", "3", "--format", "csv"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{csv}");
}

#[test]
fn zeta_assemble_reports_theorem_b() {
    let out = liezeta(&["zeta", "assemble", "--lattice", "sl4", "--m", "1", "--check-theorem-b"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["verdicts"]["theorem_b_match"], true);
    assert_eq!(v["verdicts"]["F1_eq_G1"], true);
    assert_eq!(v["result"]["checks"]["abscissa_poincare"], "5/2");
    assert_eq!(v["result"]["checks"]["abscissa_group"], "1/2");
}

#[test]
fn n22_ratios_at_q5() {
    let v = json_of(&liezeta(&["transitions", "--q", "5", "--class", "N22"]));
    assert_eq!(v["result"]["ratios"]["4"], 15500);
    assert_eq!(v["result"]["ratios"]["2"], 124);
    assert_eq!(v["result"]["match"], true);
}

#[test]
fn n211_rank4_locus_at_q3() {
    let out = liezeta(&["transitions", "n211", "--q", "3"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["result"]["l4"], v["result"]["expected_l4"]);
}

#[test]
fn expensive_runs_are_refused_with_an_estimate() {
    let out = liezeta(&["shadow", "scan", "--element", "builtin:b", "--mode", "full"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("refused") && err.contains("--long"), "{err}");
    assert!(err.chars().any(|c| c.is_ascii_digit()));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_element_file_is_an_error() {
    let path = scratch("bad_element.txt");
    std::fs::write(&path, "1 2 3\n4 x 6\n").unwrap();
    let out = liezeta(&["shadow", "scan", "--element", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed element file"));
}

#[test]
fn element_file_matches_builtin() {
    let path = scratch("b.txt");
    std::fs::write(&path, "0 1 3 0\n0 0 0 3\n0 0 0 1\n0 0 0 0\n").unwrap();
    let from_file = json_of(&liezeta(&["shadow", "scan", "--element", path.to_str().unwrap()]));
    let builtin = json_of(&liezeta(&["shadow", "scan", "--element", "builtin:b"]));
    assert_eq!(from_file["result"]["sp_lift_count"], builtin["result"]["sp_lift_count"]);
    assert_eq!(builtin["result"]["sp_lift_count"], "1594323");
}

#[test]
fn unknown_subcommand_fails() {
    let out = liezeta(&["frobnicate"]);
    assert!(!out.status.success());
}

#[test]
fn failing_verdict_sets_exit_code() {
    let dump = liezeta(&["lattice", "dump", "--lattice", "sl2", "--format", "csv"]);
    let table = String::from_utf8(dump.stdout).unwrap();
    let path = scratch("sl2.txt");
    std::fs::write(&path, &table).unwrap();
    assert!(liezeta(&["lattice", "validate", "--table", path.to_str().unwrap(), "--dim", "3"]).status.success());

    // Break antisymmetry of the first constant.
    let mut lines: Vec<String> = table.lines().map(String::from).collect();
    let first = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    let mut f: Vec<String> = lines[first].split_whitespace().map(String::from).collect();
    f[3] = (f[3].parse::<i64>().unwrap() + 1).to_string();
    lines[first] = f.join(" ");
    std::fs::write(&path, lines.join("\n")).unwrap();
    let out = liezeta(&["lattice", "validate", "--table", path.to_str().unwrap(), "--dim", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["verdicts"]["antisymmetric_and_jacobi"], false);
}

#[test]
fn worker_count_does_not_change_results() {
    let run = |w: &str| {
        let out = liezeta(&["--workers", w, "poincare", "brute", "--lattice", "sl3", "--p", "3", "--nmax", "1"]);
        assert!(out.status.success());
        let mut v = json_of(&out);
        v["runtime_ms"] = Value::Null;
        v
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn fset_prefix() {
    let out = liezeta(&["fset", "--q", "3", "--sequence", "Sub,N211", "--limit", "20"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["result"]["elements"], 20);
}
