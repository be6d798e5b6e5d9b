use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn evmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evmix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(out.stderr.trim_ascii()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn simulate_re(dir: &TempDir, seed: &str) -> PathBuf {
    let data = dir.path().join(format!("re-{seed}.csv"));
    let out = evmix(&[
        "simulate", "--model", "re", "--mu", "0", "--sigma", "1", "--alpha", "0.5", "--m", "50", "--n", "10",
        "--seed", seed, "--output", path_arg(&data),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    data
}

#[test]
fn random_effects_round_trip() {
    let dir = TempDir::new().unwrap();
    let data = simulate_re(&dir, "11");
    let fit = dir.path().join("fit.json");
    let out = evmix(&["fit", "--model", "re", "--input", path_arg(&data), "--output", path_arg(&fit)]);
    assert!(out.status.success());
    let doc = json(&fit);
    assert_eq!(doc["model"], "re");
    assert_eq!(doc["labels"].as_array().unwrap().len(), 50);
    assert_eq!(doc["observations"], 500);
    let est = doc["fit"]["estimates"].as_array().unwrap();
    let se = doc["fit"]["std_errors"].as_array().unwrap();
    for ((e, s), truth) in est.iter().zip(se).zip([0.0, 1.0, 0.5]) {
        let (e, s) = (e.as_f64().unwrap(), s.as_f64().unwrap());
        assert!((e - truth).abs() < 3.0 * s, "{e} ± {s} vs {truth}");
    }
}

#[test]
fn ma1_round_trip() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("ma.csv");
    let out = evmix(&[
        "simulate", "--model", "ma1", "--b", "0.5", "--alpha", "0.6", "--n", "100", "--replicates", "5",
        "--seed", "3", "--output", path_arg(&data),
    ]);
    assert!(out.status.success());
    let fit = dir.path().join("fit.json");
    let out = evmix(&["fit", "--model", "ma1", "--starts", "4", "--input", path_arg(&data), "--output", path_arg(&fit)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&fit);
    let names: Vec<&str> = doc["fit"]["names"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(names, ["mu_1", "mu_2", "mu_3", "mu_4", "mu_5", "b", "sigma", "alpha"]);
    let est = doc["fit"]["estimates"].as_array().unwrap();
    let se = doc["fit"]["std_errors"].as_array().unwrap();
    for (k, truth) in [(5, 0.5), (7, 0.6)] {
        let (e, s) = (est[k].as_f64().unwrap(), se[k].as_f64().unwrap());
        assert!((e - truth).abs() < 3.0 * s, "{} {e} ± {s}", names[k]);
    }
}

#[test]
fn same_inputs_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let a = std::fs::read(simulate_re(&dir, "5")).unwrap();
    let b_path = dir.path().join("again.csv");
    evmix(&[
        "simulate", "--model", "re", "--mu", "0", "--sigma", "1", "--alpha", "0.5", "--m", "50", "--n", "10",
        "--seed", "5", "--output", path_arg(&b_path),
    ]);
    assert_eq!(a, std::fs::read(&b_path).unwrap());
    let other = std::fs::read(simulate_re(&dir, "6")).unwrap();
    assert_ne!(a, other);

    let data = dir.path().join("re-5.csv");
    let fits: Vec<Vec<u8>> = (0..2)
        .map(|_| evmix(&["fit", "--model", "re", "--input", path_arg(&data)]).stdout)
        .collect();
    assert!(!fits[0].is_empty());
    assert_eq!(fits[0], fits[1]);
}

#[test]
fn every_family_simulates() {
    let cases: [&[&str]; 6] = [
        &["--model", "re", "--m", "3", "--n", "4"],
        &["--model", "ma1", "--b", "0.7", "--n", "6"],
        &["--model", "ar1", "--rho", "0.5", "--n", "6"],
        &["--model", "spatial", "--n", "3"],
        &["--model", "hierarchical", "--beta", "0.5", "--m", "2", "--n", "3"],
        &["--model", "re", "--gamma", "0.2", "--m", "2", "--n", "3"],
    ];
    let rows = [12, 6, 6, 9, 6, 6];
    for (args, expected) in cases.iter().zip(rows) {
        let mut full = vec!["simulate", "--alpha", "0.6", "--seed", "2", "--replicates", "2"];
        full.extend_from_slice(args);
        let out = evmix(&full);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * expected, "{args:?}");
    }
}

#[test]
fn risk_reproduces_reference_return_periods() {
    let period = |args: &[&str]| {
        let mut full = vec!["risk", "--threshold", "1100"];
        full.extend_from_slice(args);
        let out = evmix(&full);
        assert!(out.status.success());
        let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
        doc["result"]["return_period"].as_f64().unwrap()
    };
    let main = period(&["--m", "6", "--n", "11", "--mu", "140.9", "--sigma", "54.1", "--alpha", "0.716"]);
    assert!((main - 9748.30).abs() < 0.01, "{main}");
    let pooled = period(&["--m", "1", "--n", "66", "--mu", "145.6", "--sigma", "69.4", "--alpha", "1"]);
    assert!((pooled - 14221.95).abs() < 0.01, "{pooled}");
}

#[test]
fn risk_with_fit_reports_an_interval() {
    let dir = TempDir::new().unwrap();
    let data = simulate_re(&dir, "21");
    let fit = dir.path().join("fit.json");
    evmix(&["fit", "--model", "re", "--input", path_arg(&data), "--output", path_arg(&fit)]);
    let out = evmix(&["risk", "--fit", path_arg(&fit), "--m", "6", "--n", "11", "--threshold", "8"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let ci = &doc["interval"];
    let (lo, est, hi) = (ci["lo"].as_f64().unwrap(), ci["estimate"].as_f64().unwrap(), ci["hi"].as_f64().unwrap());
    assert!(lo < est && est < hi);
    assert_eq!(est, doc["result"]["return_period"].as_f64().unwrap());

    let clash = evmix(&["risk", "--fit", path_arg(&fit), "--m", "6", "--n", "11", "--threshold", "8", "--mu", "1"]);
    assert_eq!(clash.status.code(), Some(1));
}

#[test]
fn infinite_return_period_is_flagged() {
    let out = evmix(&[
        "risk", "--m", "1", "--n", "1", "--threshold", "1e6", "--mu", "0", "--sigma", "1", "--alpha", "1",
    ]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["return_period_infinite"], true);
    assert!(doc["result"]["return_period"].is_null());
}

#[test]
fn diagnose_writes_report_and_plots() {
    let dir = TempDir::new().unwrap();
    let data = simulate_re(&dir, "8");
    let fit = dir.path().join("fit.json");
    evmix(&["fit", "--model", "re", "--input", path_arg(&data), "--output", path_arg(&fit)]);
    let report = dir.path().join("report.json");
    let out = evmix(&["diagnose", "--fit", path_arg(&fit), "--input", path_arg(&data), "--output", path_arg(&report)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&report);
    assert!(doc["report"]["implied_correlation"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["report"]["gumbel_plots"].as_array().unwrap().len(), 50);
    let qq = std::fs::read_to_string(dir.path().join("report.qq.csv")).unwrap();
    assert_eq!(qq.lines().next(), Some("theoretical,empirical"));
    assert_eq!(qq.lines().count(), 51);
    let gumbel = std::fs::read_to_string(dir.path().join("report.gumbel.csv")).unwrap();
    assert_eq!(gumbel.lines().count(), 501);
}

#[test]
fn single_group_is_not_identifiable() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "one.csv", "group,value\na,1.0\na,2.5\na,0.3\n");
    let out = evmix(&["fit", "--model", "re", "--input", path_arg(&data)]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "identifiability");
    let singles = write(&dir, "singles.csv", "group,value\na,1.0\nb,2.5\nc,0.3\n");
    assert_eq!(evmix(&["fit", "--model", "re", "--input", path_arg(&singles)]).status.code(), Some(3));
}

#[test]
fn exit_codes_separate_failure_classes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.csv", "group,value\na,oops\n");
    let out = evmix(&["fit", "--model", "re", "--input", path_arg(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "data");
    assert_eq!(evmix(&["fit", "--model", "re", "--input", "/nonexistent/x.csv"]).status.code(), Some(2));

    let gap = write(&dir, "gap.csv", "series,index,value\ns,1,1.0\ns,3,2.0\n");
    assert_eq!(evmix(&["fit", "--model", "ma1", "--input", path_arg(&gap)]).status.code(), Some(2));

    assert_eq!(evmix(&["simulate", "--model", "re", "--alpha", "0.5"]).status.code(), Some(1));
    assert_eq!(evmix(&["simulate", "--model", "re", "--alpha", "1.5", "--seed", "1"]).status.code(), Some(1));
    assert_eq!(evmix(&["simulate", "--model", "ma1", "--alpha", "0.5", "--seed", "1"]).status.code(), Some(1));
    assert_eq!(evmix(&["fit", "--model", "spatial", "--input", path_arg(&bad)]).status.code(), Some(1));
    assert_eq!(evmix(&["risk", "--m", "0", "--n", "1", "--threshold", "1", "--mu", "0", "--sigma", "1", "--alpha", "0.5"]).status.code(), Some(1));

    let mut big = String::from("group,value\n");
    for i in 0..20_001 {
        big.push_str(&format!("a,{}\n", i % 7));
    }
    big.push_str("b,1\nb,2\n");
    let big = write(&dir, "big.csv", &big);
    let out = evmix(&["fit", "--model", "re", "--input", path_arg(&big)]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(stderr_json(&out)["error"], "capacity");
}

#[test]
fn help_succeeds() {
    let out = evmix(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("simulate"));
}
