//! End-to-end checks of the `ffwd` binary: determinism, round-trips, and
//! exit-code conventions.

use std::path::PathBuf;
use std::process::{Command, Output};

fn ffwd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffwd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn walk_profile_roundtrips_bit_for_bit() {
    let out = ffwd(&[
        "walk-profile",
        "--length",
        "20",
        "--times",
        "3",
        "--fixed-vertices",
        "1",
        "--t-step",
        "2.5",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("# file: profile_t3.csv"));
    assert!(text.contains("# file: fixed_l1.csv"));

    // Reparse the profile section and compare against an in-process
    // recomputation: shortest round-trip formatting must be bit-exact.
    let walk = ffwd_core::walk::LineWalk::new(20).unwrap();
    let profile = walk.prob_profile(3.0).unwrap();
    let section: Vec<&str> = text
        .lines()
        .skip_while(|l| *l != "l,P")
        .skip(1)
        .take(20)
        .collect();
    assert_eq!(section.len(), 20);
    for (i, line) in section.iter().enumerate() {
        let (l, p) = line.split_once(',').expect("two columns");
        assert_eq!(l.parse::<usize>().unwrap(), i + 1);
        let reparsed: f64 = p.parse().unwrap();
        assert_eq!(reparsed.to_bits(), profile.probs[i].to_bits(), "row {i}");
    }
}

#[test]
fn chain_gen_is_deterministic() {
    let args = ["--seed", "7", "chain", "gen", "--levels", "6", "--bits", "8", "--format", "json"];
    let a = ffwd(&args);
    let b = ffwd(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["points"].as_array().unwrap().len(), 7);
    assert_eq!(doc["honest_depth"], 6);
}

#[test]
fn clock_verify_reports_path_length() {
    let out = ffwd(&["clock-verify", "--qubits", "5", "--weight", "2"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let row = text.lines().nth(1).expect("data row");
    assert_eq!(row.split(',').nth(2), Some("10")); // C(5,2)
    assert!(row.contains("true"));
}

#[test]
fn feynman_not_iteration_alternates() {
    let out = ffwd(&[
        "--seed",
        "3",
        "feynman-run",
        "--builtin",
        "not",
        "--iterations",
        "8",
        "--time",
        "4",
        "--samples",
        "50",
    ]);
    assert!(out.status.success());
    for line in stdout_str(&out).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let iterate: usize = cols[2].parse().unwrap();
        let outcome = cols[3];
        assert_eq!(outcome, if iterate.is_multiple_of(2) { "0" } else { "1" });
    }
}

#[test]
fn chain_verify_and_complete_are_consistent() {
    // Build the honest triple in-process with the same seeded hash.
    let h = ffwd_core::chains::TableHash::random(5, 10).unwrap();
    let chain = ffwd_core::chains::twisted_extend(&h, 33, 5);
    let (xq, xq1) = (chain.elements[4], chain.elements[5]);
    let out = ffwd(&[
        "--seed",
        "5",
        "--format",
        "json",
        "chain",
        "verify",
        "--bits",
        "10",
        "--x0",
        "33",
        "--xq",
        &xq.to_string(),
        "--xq1",
        &xq1.to_string(),
        "--q",
        "4",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["valid"], true);

    let out = ffwd(&[
        "--seed",
        "5",
        "--format",
        "json",
        "chain",
        "complete",
        "--bits",
        "10",
        "--x0",
        "33",
        "--xq",
        &xq.to_string(),
        "--xq1",
        &xq1.to_string(),
        "--q",
        "4",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["transcript_depth"], 4);
    assert_eq!(doc["recurrence_violations"].as_array().unwrap().len(), 0);
    assert_eq!(doc["elements"].as_array().unwrap().len(), 10);
}

#[test]
fn oracle_check_summary_and_matrix_export() {
    let out = ffwd(&[
        "--format",
        "json",
        "oracle-check",
        "--levels",
        "3",
        "--bits",
        "2",
        "--time",
        "1.5",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["consistent"], true);
    assert_eq!(doc["components"], 4);
    assert_eq!(doc["reduction"]["transcript_depth"], 3);

    let out = ffwd(&[
        "oracle-check",
        "--levels",
        "1",
        "--bits",
        "1",
        "--export-matrix",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert_eq!(text.lines().next(), Some("row,col,value"));
    // 2 forward edges, symmetric: 4 coordinate entries.
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn domain_errors_exit_with_usage_code() {
    let out = ffwd(&["walk-tail", "--length", "10", "--times", "9"]);
    assert_eq!(out.status.code(), Some(2)); // t > L/2
    let out = ffwd(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn acceptance_report_schema_and_exit_code() {
    let dir = std::env::temp_dir().join(format!("ffwd-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report_path: PathBuf = dir.join("report.json");
    let out = ffwd(&["--out", report_path.to_str().unwrap(), "acceptance"]);

    let text = std::fs::read_to_string(&report_path).expect("report written");
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["schema"], "acceptance-report/v1");
    assert_eq!(doc["total"], 13);
    let criteria = doc["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 13);
    for c in criteria {
        assert!(c["id"].is_u64());
        assert!(c["measured"].is_number());
        assert!(c["threshold"].is_number());
        assert!(c["passed"].is_boolean());
        assert!(c["detail"].is_string());
    }
    // Exit code 1 exactly when some criterion failed.
    let all_passed = doc["all_passed"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if all_passed { 0 } else { 1 }));
    // One pass/fail line per criterion on stdout.
    let lines = stdout_str(&out);
    assert_eq!(
        lines.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(),
        13
    );
    std::fs::remove_dir_all(&dir).ok();
}
