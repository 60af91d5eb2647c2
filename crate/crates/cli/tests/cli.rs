use std::path::Path;
use std::process::{Command, Output};

use renal::generators::{simulate_hawkes_se, HawkesSpec};
use renal::sequence::{load_csv, SequenceKind};
use serde_json::Value;

fn renal(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renal")).args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulated_events_load_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    let o = renal(dir.path(), &["simulate", "--process", "se", "--seed", "7", "--out", "ev.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let loaded = load_csv(dir.path().join("ev.csv"), SequenceKind::Event).unwrap();
    assert_eq!(loaded, simulate_hawkes_se(&HawkesSpec::default(), 7).unwrap());
}

#[test]
fn simulate_accepts_a_process_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.json"), r#"{"process":"arma","ar":[0.3],"ma":[],"sigma":1.0,"n":40}"#).unwrap();
    let o = renal(dir.path(), &["simulate", "--process", "p.json"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("t,x1\n"));
    assert_eq!(text.lines().count(), 41);
}

#[test]
fn train_then_test_with_saved_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (p, s) in [("arma1", "1"), ("garch", "2")] {
        assert_eq!(code(&renal(d, &["simulate", "--process", p, "--seed", s, "--out", &format!("{p}.csv")])), 0);
    }
    assert_eq!(code(&renal(d, &["train", "--data", "arma1.csv", "--seed", "3", "--out", "m.json"])), 0);
    assert_eq!(json(&d.join("m.json"))["hidden_dim"], 6);

    let o = renal(d, &["test", "--reference", "arma1.csv", "--candidate", "arma1.csv", "--model", "m.json"]);
    assert_eq!(code(&o), 0);
    let same: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(same["statistic"], 0.0);
    assert_eq!(same["reject"], false);

    let o = renal(d, &["test", "--reference", "arma1.csv", "--candidate", "garch.csv", "--model", "m.json", "--out", "r.json"]);
    assert_eq!(code(&o), 0);
    let r = json(&d.join("r.json"));
    let w = r["statistic"].as_f64().unwrap();
    assert!(w > 0.0);
    assert_eq!(r["reject"], w >= r["critical_value"].as_f64().unwrap());

    for method in ["mmd", "ewd:3", "scott"] {
        let o = renal(d, &["test", "--reference", "arma1.csv", "--candidate", "garch.csv", "--method", method]);
        assert_eq!(code(&o), 0, "{method}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn experiment_report_and_csv_twin() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("exp.json"),
        r#"{"null_process":"se","alt_process":"sc","trials":3,"seed":5,"train_cfg":{"epochs":5}}"#,
    )
    .unwrap();
    let o = renal(d, &["experiment", "--config", "exp.json", "--out", "rep.json", "--csv", "rep.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&d.join("rep.json"));
    assert_eq!(r["version"], 1);
    assert_eq!(r["config_echo"]["trials"], 3);
    assert_eq!(r["config_echo"]["hidden_dim"], 4);
    let trials = r["per_trial"].as_array().unwrap();
    assert_eq!(trials.len(), 6);
    let decided: Vec<_> = trials.iter().filter(|t| t.get("reject").is_some()).collect();
    let correct = decided
        .iter()
        .filter(|t| (t["scenario"] == "alternative") == t["reject"].as_bool().unwrap())
        .count();
    assert_eq!(r["average_accuracy"].as_f64().unwrap(), correct as f64 / decided.len() as f64);
    assert_eq!(r["excluded_trials"].as_u64().unwrap() as usize, 6 - decided.len());
    let csv = std::fs::read_to_string(d.join("rep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);

    // Flags override the config file.
    let o = renal(d, &["experiment", "--config", "exp.json", "--trials", "1", "--method", "mmd"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["config_echo"]["method"], "mmd");
    assert_eq!(r["per_trial"].as_array().unwrap().len(), 2);
}

#[test]
fn ablation_writes_plot_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = renal(
        d,
        &["ablate", "--null", "arma1", "--alt", "arma2", "--trials", "2", "--lambdas", "0.01,0.1", "--out", "a.json", "--csv", "a.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&d.join("a.json")).as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert!(csv.starts_with("lambda,type1,type2\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Invalid configuration.
    assert_eq!(code(&renal(d, &["experiment", "--null", "se", "--alt", "nope"])), 2);
    assert_eq!(code(&renal(d, &["experiment", "--null", "se", "--alt", "sc", "--alpha", "1.5"])), 2);
    assert_eq!(code(&renal(d, &["experiment", "--null", "se", "--alt", "sc", "--method", "ewd:1"])), 2);
    std::fs::write(d.join("bad.json"), r#"{"null_process":"se","alt_process":"sc","tirals":3}"#).unwrap();
    assert_eq!(code(&renal(d, &["experiment", "--config", "bad.json"])), 2);
    assert_eq!(code(&renal(d, &["frobnicate"])), 2);

    // Data errors.
    assert_eq!(code(&renal(d, &["train", "--data", "missing.csv", "--out", "m.json"])), 3);
    std::fs::write(d.join("shuffled.csv"), "t,x1\n0,1\n2,1\n1,1\n").unwrap();
    let o = renal(d, &["train", "--data", "shuffled.csv", "--out", "m.json"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":4"), "{}", String::from_utf8_lossy(&o.stderr));

    // Every training diverges: the report is still written.
    std::fs::write(
        d.join("div.json"),
        r#"{"null_process":"arma1","alt_process":"garch","trials":2,"train_cfg":{"learning_rate":1e300,"epochs":3}}"#,
    )
    .unwrap();
    assert_eq!(code(&renal(d, &["experiment", "--config", "div.json", "--out", "div-report.json"])), 4);
    let r = json(&d.join("div-report.json"));
    assert_eq!(r["excluded_trials"], 4);
    assert_eq!(r["type1_accuracy"], Value::Null);
    assert_eq!(r["retried_trainings"], 2);
}
