use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const THREE_ELEMENTS: &str =
    r#"{"n": 3, "mode": "full", "weights": [0, 0.2, 0.2, 0.8, 0.2, 0.3, 0.6, 0.7]}"#;
const OVERLAP_FAMILY: &str = r#"{"n": 4, "mode": "family",
  "family": [[1, 2], [1, 3], [2, 3], [4], [1, 2, 3, 4]],
  "weights": [1, 1, 1, 2, 3]}"#;

fn nbpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbpack"))
        .args(args)
        .env_remove("NBP_TOL")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json_out(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_three_element_with_oracle_check() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "small.json", THREE_ELEMENTS);
    let trace = dir.path().join("trace.jsonl");
    let out = json_out(&nbpack(&[
        "solve",
        "--input",
        p(&input),
        "--algorithm",
        "local",
        "--init",
        "weight",
        "--oracle-check",
        "--trace",
        p(&trace),
    ]));
    assert_eq!(out["command"], "solve");
    let result = &out["result"];
    assert!((result["total_weight"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(result["gap"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(result["partition"], serde_json::json!([[1, 2], [3]]));
    assert_eq!(result["local_maximizer"], true);
    assert_eq!(result["oracle_local_maximizer"], true);
    assert_eq!(out["input_sha256"].as_str().unwrap().len(), 64);

    let lines = std::fs::read_to_string(&trace).unwrap();
    assert!(!lines.is_empty());
    for line in lines.lines() {
        let event: Value = serde_json::from_str(line).unwrap();
        for key in ["t", "loop", "selected", "W", "event"] {
            assert!(event.get(key).is_some(), "{line}");
        }
    }
}

#[test]
fn solve_overlap_family_with_costs() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "overlap.json", OVERLAP_FAMILY);
    let out = json_out(&nbpack(&[
        "solve",
        "--input",
        p(&input),
        "--algorithm",
        "local-cost",
    ]));
    assert!((out["result"]["total_weight"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn output_is_deterministic_and_partitions_reload() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "small.json", THREE_ELEMENTS);
    let args = [
        "solve",
        "--input",
        p(&input),
        "--algorithm",
        "roundup",
        "--init",
        "uniform",
    ];
    let a = nbpack(&args);
    let b = nbpack(&args);
    assert_eq!(a.stdout, b.stdout);
    let out = json_out(&a);
    let blocks = write(&dir, "p.json", &out["result"]["partition"].to_string());
    let game = json_out(&nbpack(&[
        "game",
        "--input",
        p(&input),
        "--profile",
        p(&blocks),
    ]));
    assert_eq!(game["worth"], out["result"]["total_weight"]);
    let profile = write(&dir, "q.json", &out["result"]["final_profile"].to_string());
    let init = format!("file:{}", p(&profile));
    let again = json_out(&nbpack(&[
        "solve",
        "--input",
        p(&input),
        "--algorithm",
        "roundup",
        "--init",
        &init,
    ]));
    assert_eq!(again["result"]["iterations"], 0);
    assert_eq!(again["result"]["partition"], out["result"]["partition"]);
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.json", r#"{"n": 3, "mode": "full"}"#);
    assert_eq!(
        nbpack(&["solve", "--input", p(&input)]).status.code(),
        Some(2)
    );
    assert_eq!(
        nbpack(&["mobius", "--input", "/nonexistent/x.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn local_search_on_family_mode_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "overlap.json", OVERLAP_FAMILY);
    let out = nbpack(&["solve", "--input", p(&input), "--algorithm", "local"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn oracle_guard_exits_4() {
    let dir = TempDir::new().unwrap();
    let weights = vec!["0"; 1 << 11].join(",");
    let input = write(
        &dir,
        "big.json",
        &format!(r#"{{"n": 11, "mode": "full", "weights": [{weights}]}}"#),
    );
    assert_eq!(
        nbpack(&["oracle", "--input", p(&input)]).status.code(),
        Some(4)
    );
}

#[test]
fn mobius_table() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "small.json", THREE_ELEMENTS);
    let out = json_out(&nbpack(&["mobius", "--input", p(&input)]));
    let pair = out
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["set"] == serde_json::json!([1, 2]))
        .unwrap();
    assert!((pair["value"].as_f64().unwrap() - 0.4).abs() < 1e-12);
}

#[test]
fn approx_on_modular_instance() {
    let dir = TempDir::new().unwrap();
    // w({1}) = 1, w({2}) = 2, w({3}) = 4, additive
    let input = write(
        &dir,
        "mod.json",
        r#"{"n": 3, "mode": "full", "weights": [0, 1, 2, 3, 4, 5, 6, 7]}"#,
    );
    let out = json_out(&nbpack(&["approx", "--input", p(&input), "--k", "1"]));
    assert!(out["residual"].as_f64().unwrap() < 1e-12);
    for s in out["sample_values"].as_array().unwrap() {
        assert!((s["F_k"].as_f64().unwrap() - 7.0).abs() < 1e-9);
    }
    let bad = nbpack(&["approx", "--input", p(&input), "--k", "0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn shapley_game_on_best_partition() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "small.json", THREE_ELEMENTS);
    let blocks = write(&dir, "p.json", "[[1, 2], [3]]");
    let out = json_out(&nbpack(&[
        "game",
        "--input",
        p(&input),
        "--profile",
        p(&blocks),
        "--payoff",
        "shapley",
    ]));
    let pay: Vec<f64> = out["payoffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (a, b) in pay.iter().zip([0.4, 0.4, 0.2]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(out["equilibrium"], true);
    let out = json_out(&nbpack(&[
        "game",
        "--input",
        p(&input),
        "--profile",
        p(&blocks),
        "--payoff",
        "proportional",
        "--omega",
        "1,2,1",
    ]));
    assert_eq!(out["payoffs"], serde_json::json!([0.25, 0.5, 0.25]));
}

#[test]
fn tolerance_from_environment() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "small.json", THREE_ELEMENTS);
    let out = Command::new(env!("CARGO_BIN_EXE_nbpack"))
        .args(["solve", "--input", p(&input)])
        .env("NBP_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(json_out(&out)["config"]["tol"], 1e-6);
    let out = Command::new(env!("CARGO_BIN_EXE_nbpack"))
        .args(["solve", "--input", p(&input)])
        .env("NBP_TOL", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
