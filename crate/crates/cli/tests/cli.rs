use std::process::{Command, Output};

fn pbsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbsp")).args(args).output().expect("binary runs")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["task", "d", "N", "epsilon", "formula", "dense", "sampled", "sigma", "verdict"]);
    reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

fn column(rows: &[Vec<String>], task: &str, col: usize) -> Vec<f64> {
    rows.iter().filter(|r| r[0] == task).map(|r| r[col].parse().unwrap()).collect()
}

#[test]
fn pbsp_table_success_probabilities() {
    let out = pbsp(&["table", "pbsp", "--d", "2", "--N", "1..4"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(column(&rows, "pbsp-prob", 4), [0.5, 0.75, 0.875, 0.9375]);
    assert_eq!(column(&rows, "pbsp-prob", 5), [0.5, 0.75, 0.875, 0.9375]);
}

#[test]
fn pbt_table_probabilistic_column() {
    let out = pbsp(&["table", "pbt", "--d", "2", "--N", "1..4"]);
    assert_eq!(out.status.code(), Some(0));
    let p = column(&csv_rows(&out), "pbt-prob", 4);
    let expected = [0.25, 0.4, 0.5, 4.0 / 7.0];
    for (a, b) in p.iter().zip(expected) {
        assert!((a - b).abs() < 1e-11, "{a} vs {b}");
    }
}

#[test]
fn uphp_table_plan_pairs() {
    let out = pbsp(&["table", "uphp", "--d", "2", "--eps", "0.5,0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    // N = ⌈2·2·ln(1/ε)⌉ and log₂ m = 2N for d = 2
    let oracle = |eps: f64| (4.0 * (1.0 / eps).ln()).ceil();
    assert_eq!(column(&rows, "uphp-ports", 4), [oracle(0.5), oracle(0.1)]);
    assert_eq!(column(&rows, "uphp-log2-memory", 4), [2.0 * oracle(0.5), 2.0 * oracle(0.1)]);
    let lower = rows.iter().find(|r| r[0] == "uphp-log2-lower-bound" && r[3] == "0.5").unwrap();
    assert_eq!((lower[4].as_str(), lower[8].as_str()), ("", "vacuous"));
}

#[test]
fn dense_column_absent_above_budget() {
    let out = pbsp(&["table", "pbsp", "--d", "2", "--N", "3", "--dense-budget", "16", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json[0]["dense"].is_null());
    assert_eq!(json[0]["formula"], "0.875");
    assert!(json[0]["sampled"].is_string());
}

#[test]
fn verify_default_grid_passes() {
    let out = pbsp(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&out);
    assert!(rows.iter().all(|r| r[8] != "fail"));
    for task in ["povm-completeness-prob", "dense-vs-structured", "nonsignaling-fid", "fuchs-van-de-graaf", "qrac-pullback"] {
        assert!(rows.iter().any(|r| r[0] == task), "missing {task}");
    }
}

#[test]
fn perturbed_povm_fails_completeness() {
    let out = pbsp(&["verify", "--perturb", "--d", "2", "--N", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("povm-completeness-prob d=2 N=2"), "{stderr}");
    assert!(stderr.contains("povm-completeness-det d=2 N=2"), "{stderr}");
    let rows = csv_rows(&out);
    let fails: Vec<&str> = rows.iter().filter(|r| r[8] == "fail").map(|r| r[0].as_str()).collect();
    assert_eq!(fails, ["povm-completeness-prob", "povm-completeness-det"]);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [&["verify"][..], &["table", "pbsp", "--trials", "200000"], &["table", "qrac"], &["sample"]] {
        let a = pbsp(args);
        let b = pbsp(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn sample_within_three_sigma() {
    let out = pbsp(&["sample", "--d", "2", "--N", "3", "--trials", "100000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    let row = rows.iter().find(|r| r[0] == "sample-prob").unwrap();
    let (p, est, sigma): (f64, f64, f64) = (row[4].parse().unwrap(), row[6].parse().unwrap(), row[7].parse().unwrap());
    assert_eq!(p, 0.875);
    assert!((est - p).abs() <= 3.0 * sigma);
    assert_eq!(row[8], "pass");
}

#[test]
fn seeds_change_estimates_not_verdicts() {
    let run = |seed: &str| csv_rows(&pbsp(&["sample", "--trials", "100000", "--seed", seed]));
    let (a, b) = (run("7"), run("8"));
    let est = |rows: &[Vec<String>]| rows.iter().find(|r| r[0] == "sample-prob").unwrap()[6].clone();
    assert_ne!(est(&a), est(&b));
    let verdicts = |rows: &[Vec<String>]| rows.iter().find(|r| r[0] == "sample-prob").unwrap()[8].clone();
    assert_eq!(verdicts(&a), verdicts(&b));
}

#[test]
fn few_trials_give_wide_interval() {
    let out = pbsp(&["sample", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    let sigma: f64 = rows.iter().find(|r| r[0] == "sample-prob").unwrap()[7].parse().unwrap();
    assert!((sigma - (0.875f64 * 0.125 / 10.0).sqrt()).abs() < 1e-11);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out_path = dir.path().join("report.csv");
    std::fs::write(&cfg, format!(r#"{{"command": "table pbt", "d": 3, "N": [1, 2], "out": {:?}}}"#, out_path)).unwrap();
    let out = pbsp(&["table", "pbt", "--config", cfg.to_str().unwrap(), "--N", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("pbt-prob,3,4,,"), "{first}");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["table", "pbsp", "--N", "4..1"][..],
        &["table", "qrac", "--d", "6"],
        &["sample", "--trials", "0"],
        &["frobnicate"],
        &["table", "pbsp", "--format", "xml"],
    ] {
        let out = pbsp(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"command": "sample"}"#).unwrap();
    assert_eq!(pbsp(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn capacity_error_exits_three() {
    let out = pbsp(&["verify", "--d", "2", "--N", "3", "--dense-budget", "16"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dense-budget"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(pbsp(&["--help"]).status.code(), Some(0));
    assert_eq!(pbsp(&["uphp", "plan", "--help"]).status.code(), Some(0));
}
