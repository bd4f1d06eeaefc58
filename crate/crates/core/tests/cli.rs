//! End-to-end runs of the `msan` binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn msan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msan"))
        .args(args)
        .env_remove("MSAN_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Every file under `dir` except run manifests (which record wall time).
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "run_manifest.json" {
                let key = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(key, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn gen(dir: &Path, count: &str, seed: &str) {
    let o = msan(&[
        "gen",
        "--count",
        count,
        "--seed",
        seed,
        "--max-segments",
        "10",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_writes_files_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    gen(&a, "200", "7");
    gen(&b, "200", "7");
    let files = std::fs::read_dir(a.join("instances")).unwrap().count();
    assert_eq!(files, 200);
    assert!(a.join("manifest.json").exists());
    assert!(a.join("run_manifest.json").exists());
    assert_eq!(snapshot(&a), snapshot(&b));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["command"][1], "gen");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(msan(&["gen", "--count", "0", "--out", "x"]).status.code(), Some(2));
    assert_eq!(
        msan(&["train", "--data", "x", "--out", "y", "--beta", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(msan(&["compare", "--data", "x", "--methods", ""]).status.code(), Some(2));
    assert_eq!(msan(&["solve", "--method", "greedy", "--instance", "x"]).status.code(), Some(2));
    assert_eq!(msan(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(msan(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("none");
    let o = msan(&["train", "--data", missing.to_str().unwrap(), "--out", "y"]);
    assert_eq!(o.status.code(), Some(1));
    gen(tmp.path(), "4", "1");
    let inst = tmp.path().join("instances/vid00000.json");
    let o = msan(&[
        "solve",
        "--method",
        "policy",
        "--instance",
        inst.to_str().unwrap(),
        "--ckpt",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    // Training instances carry no annotations.
    let o = msan(&["eval", "--data", tmp.path().to_str().unwrap(), "--split", "train", "--methods", "sam"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("annotations"));
}

const HAND_FIXTURE: &str = r#"{
  "schema_version": 1,
  "id": "hand",
  "segments": [
    {"index": 0, "duration_s": 4.0, "features": [0.0], "labels": [{"level": 1}]},
    {"index": 1, "duration_s": 5.0, "features": [0.0], "labels": [{"level": 4}]},
    {"index": 2, "duration_s": 6.0, "features": [0.0], "labels": [{"level": 4}]}
  ],
  "ppl": [[0, 1, 2.5], [0, 2, 1.5], [1, 2, 3.0]],
  "force_end_segment": false
}"#;

#[test]
fn solve_oracle_on_hand_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("hand.json");
    std::fs::write(&path, HAND_FIXTURE).unwrap();
    let o = msan(&["solve", "--method", "oracle", "--instance", path.to_str().unwrap(), "--target", "10"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // {0,1}: 1.25 + e^-2.5, {0,2}: 1.25 + e^-1.5, {1,2}: 2 + e^-3.
    assert_eq!(report["temporal"], serde_json::json!([1, 2]));
    let v = report["objective"].as_f64().unwrap();
    assert!((v - (2.0 + (-3.0f64).exp())).abs() < 1e-12);
    assert!(report.get("metrics").is_none());
}

#[test]
fn random_cut_lands_in_window_and_policy_needs_a_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "6", "2");
    for id in 0..6 {
        let inst = tmp.path().join(format!("instances/vid{id:05}.json"));
        let o = msan(&["solve", "--method", "random-cut", "--instance", inst.to_str().unwrap(), "--target", "10"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        let tau = report["total_duration_s"].as_f64().unwrap();
        assert!((8.0..=12.0).contains(&tau), "tau {tau}");
    }
    let inst = tmp.path().join("instances/vid00000.json");
    let o = msan(&["solve", "--method", "policy", "--instance", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_table_is_well_formed_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "40", "3");
    let data = tmp.path().to_str().unwrap();
    let out = tmp.path().join("cmp");
    let run = || {
        let o = msan(&["compare", "--data", data, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let first = run();
    assert_eq!(first, run());
    let mut reader = csv::Reader::from_reader(first.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(header, ["method", "imp", "coh", "overall", "feasible_rate", "objective", "reward", "count"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let methods: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(methods, ["random", "random-cut", "sam", "oracle"]);
    let objective = |r: &csv::StringRecord| r[5].parse::<f64>().unwrap();
    let oracle = objective(&rows[3]);
    assert!(rows.iter().all(|r| objective(r) <= oracle + 1e-12));
    assert!(rows.iter().all(|r| &r[7] == "8"));
    for f in ["per_instance.csv", "summary.csv", "run_manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn train_then_solve_and_eval_with_the_policy() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "20", "4");
    let run_dir = tmp.path().join("run");
    let o = Command::new(env!("CARGO_BIN_EXE_msan"))
        .args(["train", "--epochs", "1", "--out", run_dir.to_str().unwrap()])
        .env("MSAN_DATA_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["epoch_001.ckpt", "final.ckpt", "train_log.csv", "sweep.csv", "run_manifest.json"] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let ckpt = run_dir.join("final.ckpt");
    let inst = tmp.path().join("instances/vid00019.json");
    let o = msan(&[
        "solve",
        "--method",
        "policy",
        "--instance",
        inst.to_str().unwrap(),
        "--ckpt",
        ckpt.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["total_duration_s"].as_f64().unwrap() <= 12.0);
    assert!(report["metrics"].is_object());
    let o = msan(&[
        "eval",
        "--data",
        tmp.path().to_str().unwrap(),
        "--methods",
        "policy,sam",
        "--ckpt",
        ckpt.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("policy,vid")).count(), 4);
}

#[test]
fn hidden_gradcheck_passes() {
    let o = msan(&["gradcheck", "--coords", "100"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
