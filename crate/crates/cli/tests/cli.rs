//! CLI behavior: exit codes, validation messages, and output schemas.
//! Exit codes: 0 success, 1 usage, 2 data error, 3 sampler hard failure,
//! 4 completed with convergence warnings.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wlbayes")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn wlbayes")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn simulate_into(dir: &Path, n: usize, proportions: &str, seed: u64) -> PathBuf {
    let out = run(&[
        "simulate",
        "--family",
        "binary",
        "--n",
        &n.to_string(),
        "--proportions",
        proportions,
        "--seed",
        &seed.to_string(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir.join("dataset.csv")
}

#[test]
fn missing_required_flag_is_usage_error() {
    let out = run(&[
        "simulate",
        "--family",
        "binary",
        "--n",
        "10",
        "--proportions",
        "0.5,0.5",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--seed"));
}

#[test]
fn proportions_must_sum_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--family",
        "binary",
        "--n",
        "10",
        "--proportions",
        "0.5,0.6",
        "--seed",
        "1",
        "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("proportions must sum to 1"));
}

#[test]
fn corrupt_csv_row_is_a_data_error_naming_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("bad.csv");
    std::fs::write(&input, "y,x1\n1,0.5\n0,oops\n1,0.25\n").unwrap();
    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "binary",
        "--seed",
        "1",
        "--out-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_outcome_column_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("data.csv");
    std::fs::write(&input, "label,x1\n1,0.5\n0,1.5\n").unwrap();
    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "binary",
        "--seed",
        "1",
        "--out-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("outcome column"));
}

#[test]
fn balanced_data_weighted_equals_unweighted_fit() {
    let tmp = tempfile::tempdir().unwrap();
    // exactly equal class counts, so inverse-proportion weights are all 1
    let input = tmp.path().join("balanced.csv");
    let mut csv = String::from("y,x1\n");
    for i in 0..24 {
        csv.push_str(&format!(
            "{},{}\n",
            i % 2,
            (i as f64 - 11.5) / 7.0 + f64::from(i % 2)
        ));
    }
    std::fs::write(&input, csv).unwrap();
    for (dir, weighting) in [("w", "inverse"), ("u", "none")] {
        let out = run(&[
            "fit",
            "--input",
            input.to_str().unwrap(),
            "--outcome",
            "y",
            "--family",
            "binary",
            "--weighting",
            weighting,
            "--chains",
            "2",
            "--warmup",
            "150",
            "--draws",
            "100",
            "--seed",
            "12",
            "--out-dir",
            tmp.path().join(dir).to_str().unwrap(),
        ]);
        assert!(code(&out) == 0 || code(&out) == 4, "{}", stderr(&out));
    }
    // balanced classes force unit weights, so the draws are identical
    let a = std::fs::read(tmp.path().join("w/draws.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("u/draws.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ordinal_fit_exports_increasing_cutpoint_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--family",
        "ordinal",
        "--n",
        "45",
        "--proportions",
        "0.4,0.35,0.25",
        "--seed",
        "2",
        "--out-dir",
        tmp.path().join("data").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run(&[
        "fit",
        "--input",
        tmp.path().join("data/dataset.csv").to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "ordinal",
        "--chains",
        "2",
        "--warmup",
        "200",
        "--draws",
        "150",
        "--seed",
        "4",
        "--out-dir",
        tmp.path().join("fit").to_str().unwrap(),
    ]);
    assert!(code(&out) == 0 || code(&out) == 4, "{}", stderr(&out));

    let mut rdr = csv::Reader::from_path(tmp.path().join("fit/draws.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let c1 = headers
        .iter()
        .position(|h| h == "cut_1")
        .expect("cut_1 column");
    let c2 = headers
        .iter()
        .position(|h| h == "cut_2")
        .expect("cut_2 column");
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.unwrap();
        let v1: f64 = record[c1].parse().unwrap();
        let v2: f64 = record[c2].parse().unwrap();
        assert!(v1 < v2, "cutpoints must increase in every draw");
        rows += 1;
    }
    assert_eq!(rows, 300);
}

#[test]
fn binary_loo_emits_all_metric_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let input = simulate_into(&tmp.path().join("data"), 16, "0.75,0.25", 3);
    let out = run(&[
        "loo",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "binary",
        "--chains",
        "1",
        "--warmup",
        "120",
        "--draws",
        "100",
        "--seed",
        "8",
        "--out-dir",
        tmp.path().join("loo").to_str().unwrap(),
    ]);
    assert!(code(&out) == 0 || code(&out) == 4, "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("loo/metrics.json")).unwrap())
            .unwrap();
    for key in [
        "auc",
        "accuracy",
        "balanced_accuracy",
        "brier",
        "balanced_brier",
        "sensitivity",
        "specificity",
        "ppv",
        "npv",
        "f1",
        "p4",
        "rps",
        "mean_calibration_mse",
        "calibration_intercept",
        "calibration_slope",
    ] {
        assert!(doc["overall"].get(key).is_some(), "missing key {key}");
    }
    assert!(doc["collapses"].as_array().unwrap().is_empty());
}

#[test]
fn ordinal_loo_includes_both_collapses() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--family",
        "ordinal",
        "--n",
        "24",
        "--proportions",
        "0.34,0.42,0.24",
        "--seed",
        "9",
        "--out-dir",
        tmp.path().join("data").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "loo",
        "--input",
        tmp.path().join("data/dataset.csv").to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "ordinal",
        "--chains",
        "1",
        "--warmup",
        "120",
        "--draws",
        "100",
        "--seed",
        "10",
        "--out-dir",
        tmp.path().join("loo").to_str().unwrap(),
    ]);
    assert!(code(&out) == 0 || code(&out) == 4, "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("loo/metrics.json")).unwrap())
            .unwrap();
    assert!(doc["overall"]["accuracy"].is_number());
    assert!(doc["overall"]["balanced_accuracy"].is_number());
    let collapses: Vec<&str> = doc["collapses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["collapse"].as_str().unwrap())
        .collect();
    assert_eq!(collapses, vec!["1_vs_23", "12_vs_3"]);
}

#[test]
fn tiny_loo_completes_quickly() {
    let start = std::time::Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("three.csv");
    std::fs::write(&input, "y,x1\n0,-1.0\n1,0.4\n0,0.9\n").unwrap();
    let out = run(&[
        "loo",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "binary",
        "--chains",
        "1",
        "--warmup",
        "100",
        "--draws",
        "80",
        "--seed",
        "2",
        "--out-dir",
        tmp.path().join("loo").to_str().unwrap(),
    ]);
    assert!(code(&out) == 0 || code(&out) == 4, "{}", stderr(&out));
    assert!(
        start.elapsed().as_secs() < 60,
        "N=3 smoke run must finish within a minute"
    );
}

#[test]
fn compare_refuses_mismatched_datasets_and_accepts_self() {
    let tmp = tempfile::tempdir().unwrap();
    let input_a = simulate_into(&tmp.path().join("da"), 14, "0.75,0.25", 1);
    let input_b = simulate_into(&tmp.path().join("db"), 14, "0.75,0.25", 2);
    for (input, dir) in [(&input_a, "la"), (&input_b, "lb")] {
        let out = run(&[
            "loo",
            "--input",
            input.to_str().unwrap(),
            "--outcome",
            "y",
            "--family",
            "binary",
            "--chains",
            "1",
            "--warmup",
            "100",
            "--draws",
            "80",
            "--seed",
            "3",
            "--out-dir",
            tmp.path().join(dir).to_str().unwrap(),
        ]);
        assert!(code(&out) == 0 || code(&out) == 4, "{}", stderr(&out));
    }
    let out = run(&[
        "compare",
        "--a",
        tmp.path().join("la").to_str().unwrap(),
        "--b",
        tmp.path().join("lb").to_str().unwrap(),
        "--out-dir",
        tmp.path().join("cmp_bad").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("checksums differ"));

    // self-comparison: all differences zero, no better-value markers
    let out = run(&[
        "compare",
        "--a",
        tmp.path().join("la").to_str().unwrap(),
        "--b",
        tmp.path().join("la").to_str().unwrap(),
        "--label-a",
        "first",
        "--label-b",
        "second",
        "--out-dir",
        tmp.path().join("cmp_self").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = std::fs::read_to_string(tmp.path().join("cmp_self/comparison.txt")).unwrap();
    assert!(!table.contains('*'));
    let mut rdr = csv::Reader::from_path(tmp.path().join("cmp_self/differences.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let diff_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.ends_with("_diff"))
        .map(|(i, _)| i)
        .collect();
    assert!(!diff_cols.is_empty());
    for record in rdr.records() {
        let record = record.unwrap();
        for &i in &diff_cols {
            assert_eq!(record[i].parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn explicit_weighting_requires_proportions() {
    let tmp = tempfile::tempdir().unwrap();
    let input = simulate_into(&tmp.path().join("data"), 12, "0.75,0.25", 4);
    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "binary",
        "--weighting",
        "explicit",
        "--seed",
        "1",
        "--out-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--class-proportions"));

    let out = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "binary",
        "--weighting",
        "explicit",
        "--class-proportions",
        "0=0.8,1=0.2",
        "--chains",
        "1",
        "--warmup",
        "100",
        "--draws",
        "80",
        "--seed",
        "1",
        "--out-dir",
        tmp.path().join("out2").to_str().unwrap(),
    ]);
    assert!(code(&out) == 0 || code(&out) == 4, "{}", stderr(&out));
}

#[test]
fn classification_rule_must_match_the_family() {
    let tmp = tempfile::tempdir().unwrap();
    let input = simulate_into(&tmp.path().join("data"), 12, "0.75,0.25", 7);
    let out = run(&[
        "loo",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "binary",
        "--rule",
        "argmax",
        "--chains",
        "1",
        "--warmup",
        "80",
        "--draws",
        "60",
        "--seed",
        "1",
        "--out-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("does not apply"));
}

#[test]
fn ordinal_latent_median_rule_runs_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--family",
        "ordinal",
        "--n",
        "21",
        "--proportions",
        "0.34,0.42,0.24",
        "--seed",
        "13",
        "--out-dir",
        tmp.path().join("data").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "loo",
        "--input",
        tmp.path().join("data/dataset.csv").to_str().unwrap(),
        "--outcome",
        "y",
        "--family",
        "ordinal",
        "--rule",
        "latent-median",
        "--chains",
        "1",
        "--warmup",
        "100",
        "--draws",
        "80",
        "--seed",
        "14",
        "--out-dir",
        tmp.path().join("loo").to_str().unwrap(),
    ]);
    assert!(code(&out) == 0 || code(&out) == 4, "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("loo/metrics.json")).unwrap())
            .unwrap();
    assert_eq!(doc["rule"], "ordinal_latent_median");
    assert!(doc["overall"]["accuracy"].is_number());
}
