//! End-to-end runs of the `relay` binary on small worlds.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relay_core::metrics::read_report;
use relay_core::trajectory::{read_jsonl, ReadMode};
use relay_core::SimConfig;

const SMALL: &[&str] = &["--runs", "2", "--frames", "3", "--events-per-frame", "200", "--frame-packets-per-ue", "50"];

fn relay(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relay")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = relay(dir, args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn with<'a>(base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    base.iter().chain(extra).copied().collect()
}

/// Simulates the small world and trains a short model; returns (data, model).
fn data_and_model(dir: &Path) -> (PathBuf, PathBuf) {
    ok(dir, &with(&["simulate"], &with(SMALL, &["--out", "data.jsonl", "--metrics-out", "m.csv"])));
    ok(dir, &["train", "--data", "data.jsonl", "--epochs", "2", "--model-out", "model.json", "--history-out", "h.csv"]);
    (dir.join("data.jsonl"), dir.join("model.json"))
}

fn stat(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{stdout}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn single_event_world_writes_one_record() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--runs", "1", "--frames", "1", "--events-per-frame", "1", "--out", "t.jsonl", "--metrics-out", "m.csv"]);
    let recs = read_jsonl(dir.path().join("t.jsonl"), ReadMode::Strict).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(read_report(dir.path().join("m.csv")).unwrap().len(), 1);
}

#[test]
fn simulate_is_reproducible_and_counts_records() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &with(&["simulate"], &with(SMALL, &["--out", "a.jsonl", "--metrics-out", "a.csv"])));
    ok(p, &with(&["simulate"], &with(SMALL, &["--out", "b.jsonl", "--metrics-out", "b.csv"])));
    assert_eq!(std::fs::read(p.join("a.jsonl")).unwrap(), std::fs::read(p.join("b.jsonl")).unwrap());
    assert_eq!(std::fs::read(p.join("a.csv")).unwrap(), std::fs::read(p.join("b.csv")).unwrap());
    assert_eq!(read_jsonl(p.join("a.jsonl"), ReadMode::Strict).unwrap().len(), 2 * 3 * 200);
    assert_eq!(read_report(p.join("a.csv")).unwrap().len(), 2 * 3);
    ok(p, &with(&["simulate"], &with(SMALL, &["--seed", "9", "--out", "c.jsonl", "--metrics-out", "c.csv"])));
    assert_ne!(std::fs::read(p.join("a.jsonl")).unwrap(), std::fs::read(p.join("c.jsonl")).unwrap());
}

#[test]
fn banner_reproduces_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let out = relay(dir.path(), &with(&["simulate", "--mu-s", "1.25", "--lambdas", "4,6,9,7,8"], &with(SMALL, &["--out", "t.jsonl", "--metrics-out", "m.csv"])));
    assert!(out.status.success());
    let banner: String = String::from_utf8(out.stderr)
        .unwrap()
        .lines()
        .filter_map(|l| l.strip_prefix("#   "))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(dir.path().join("echo.toml"), &banner).unwrap();
    let cfg = SimConfig::load(dir.path().join("echo.toml")).unwrap();
    assert_eq!(cfg.mu_s, 1.25);
    assert_eq!(cfg.lambdas, vec![4.0, 6.0, 9.0, 7.0, 8.0]);
    assert_eq!(cfg.runs, 2);
    // the echoed file drives an identical run
    ok(dir.path(), &["simulate", "--config", "echo.toml", "--out", "u.jsonl", "--metrics-out", "n.csv"]);
    assert_eq!(std::fs::read(dir.path().join("t.jsonl")).unwrap(), std::fs::read(dir.path().join("u.jsonl")).unwrap());
}

#[test]
fn train_history_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &with(&["simulate"], &with(SMALL, &["--out", "d.jsonl", "--metrics-out", "m.csv"])));
    let args = ["train", "--data", "d.jsonl", "--epochs", "1", "--hidden", "8,8"];
    ok(p, &with(&args, &["--model-out", "a.json", "--history-out", "ha.csv"]));
    ok(p, &with(&args, &["--model-out", "b.json", "--history-out", "hb.csv"]));
    let history = std::fs::read_to_string(p.join("ha.csv")).unwrap();
    assert_eq!(history.lines().count(), 2);
    assert!(history.starts_with("epoch,train_loss,train_acc,val_loss,val_acc\n"));
    assert_eq!(std::fs::read(p.join("a.json")).unwrap(), std::fs::read(p.join("b.json")).unwrap());
}

#[test]
fn evaluate_on_training_data() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &with(&["simulate"], &with(SMALL, &["--out", "d.jsonl", "--metrics-out", "m.csv"])));
    let train_out = ok(p, &["train", "--data", "d.jsonl", "--epochs", "3", "--model-out", "model.json", "--history-out", "h.csv"]);
    let out = ok(p, &["evaluate", "--model", "model.json", "--data", "d.jsonl", "--report-out", "r.json", "--confusion-out", "c.csv"]);
    let val_acc = stat(&train_out, "final val_acc");
    let acc = stat(&out, "accuracy");
    // Training data includes the fitted split, so it should not score worse than validation.
    assert!(acc + 0.01 >= val_acc, "{acc} vs {val_acc}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("r.json")).unwrap()).unwrap();
    let total: u64 = report["confusion"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()).map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 1200);
    assert_eq!(std::fs::read_to_string(p.join("c.csv")).unwrap().lines().count(), 6);
}

#[test]
fn expert_against_itself_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &with(&["compare", "--policies", "expert,expert", "--out", "c.csv"], SMALL));
    let rows = read_report(dir.path().join("c.csv")).unwrap();
    let (a, b): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.policy == "expert");
    assert_eq!(a.len(), 6);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.run, x.frame, x.drops, x.delivered, x.longest_session), (y.run, y.frame, y.drops, y.delivered, y.longest_session));
        assert_eq!(x.edt.to_bits(), y.edt.to_bits());
        assert_eq!(x.energy.to_bits(), y.energy.to_bits());
    }
}

#[test]
fn compare_and_shift_with_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let (_, model) = data_and_model(dir.path());
    let model = model.to_str().unwrap();
    ok(dir.path(), &with(&["compare", "--model", model, "--out", "c.csv"], SMALL));
    let rows = read_report(dir.path().join("c.csv")).unwrap();
    assert_eq!(rows.iter().filter(|r| r.policy == "clone").count(), 6);

    // no shift: matched and shifted accuracies coincide
    let out = ok(dir.path(), &with(&["shift", "--model", model, "--new-lambdas", "3,5,10,8,7", "--out", "s.csv"], SMALL));
    assert_eq!(stat(&out, "accuracy_drop_points"), 0.0);
    let out = ok(dir.path(), &with(&["shift", "--model", model, "--new-lambdas", "4,6,9,7,8", "--out", "s.csv"], SMALL));
    assert!(out.contains("shifted_lambdas [4.0, 6.0, 9.0, 7.0, 8.0]"));
    assert_eq!(read_report(dir.path().join("s.csv")).unwrap().len(), 12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // configuration and argument errors
    assert_eq!(code(&relay(p, &["simulate", "--lambdas", "1,2"])), 2);
    assert_eq!(code(&relay(p, &["simulate", "--battery-init-range", "5"])), 2);
    assert_eq!(code(&relay(p, &["simulate", "--config", "missing.toml"])), 2);
    std::fs::write(p.join("bad.toml"), "n_uess = 4\n").unwrap();
    assert_eq!(code(&relay(p, &["simulate", "--config", "bad.toml"])), 2);
    assert_eq!(code(&relay(p, &["train", "--data", "x.jsonl", "--epochs", "0"])), 2);
    assert_eq!(code(&relay(p, &["bogus"])), 2);

    let (_, model) = data_and_model(p);
    let model = model.to_str().unwrap();
    assert_eq!(code(&relay(p, &["shift", "--model", model, "--new-lambdas", "4,6"])), 2);
    assert_eq!(code(&relay(p, &["simulate", "--policy", "clone"])), 1);

    // data errors
    std::fs::write(p.join("empty.jsonl"), "").unwrap();
    assert_eq!(code(&relay(p, &["evaluate", "--model", model, "--data", "empty.jsonl"])), 3);
    std::fs::write(p.join("broken.jsonl"), "{\"run\":0}\n").unwrap();
    assert_eq!(code(&relay(p, &["train", "--data", "broken.jsonl"])), 3);
    assert_eq!(code(&relay(p, &["evaluate", "--model", "nope.json", "--data", "data.jsonl"])), 3);
    assert_eq!(code(&relay(p, &["compare", "--model", model, "--n-ues", "4", "--lambdas", "1,2,3,4"])), 3);

    // thresholds
    assert_eq!(code(&relay(p, &["evaluate", "--model", model, "--data", "data.jsonl", "--min-accuracy", "1.01"])), 4);
    let out = relay(p, &with(&["shift", "--model", model, "--new-lambdas", "3,5,10,8,7", "--min-drop", "5"], SMALL));
    assert_eq!(code(&out), 4);
}
