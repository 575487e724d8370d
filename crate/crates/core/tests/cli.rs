use std::process::{Command, Output};

use blaschke_lab::report;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blaschke-lab")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    report::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn classify_power_seven() {
    let out = run(&["classify", "--zeros", "0:7", "--const", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["dirichlet_dim"], 7);
    assert_eq!(doc["theorem_case"], "power");
    assert_eq!(doc["schema"], "blaschke-lab/1");
    assert_eq!(doc["input"]["unimodular"], serde_json::json!([-1.0, 0.0]));
}

#[test]
fn classify_z4_phi() {
    let out = run(&["classify", "--zeros", "0:4,0.5:1", "--const", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["partition"], serde_json::json!([[0], [1, 2, 3, 4]]));
}

#[test]
fn partition_enum_lists_three() {
    let out = run(&["partition-enum", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["count"], 3);
    assert_eq!(doc["partitions"].as_array().unwrap().len(), 3);
    let filtered = json(&run(&["partition-enum", "--n", "6", "--filter"]));
    assert_eq!(filtered["count"], 6);
}

#[test]
fn other_subcommands_produce_reports() {
    for sub in ["monodromy", "critical", "dim"] {
        let out = run(&[sub, "--zeros", "0.3+0.2i:2,-0.4i"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert_eq!(json(&out)["command"], sub);
    }
    let crit = json(&run(&["critical", "--zeros", "0:3"]));
    assert_eq!(crit["critical"], serde_json::json!([[[0.0, 0.0], 2]]));
}

#[test]
fn case_suite_passes_and_is_deterministic() {
    let a = run(&["case-suite"]);
    let b = run(&["case-suite"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["all_pass"], true);
    let dims: Vec<u64> =
        doc["cases"].as_array().unwrap().iter().map(|c| c["dirichlet_dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, vec![6, 3, 2, 2, 3, 2, 2, 1]);
}

#[test]
fn output_file_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let out_path = dir.path().join("report.json");
    std::fs::write(&config, r#"{"rank_tol": 1e-6, "seed": 7}"#).unwrap();
    let out =
        run(&["dim", "--zeros", "0:5", "--config", config.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let doc = report::parse(&text).unwrap();
    assert_eq!(doc["config"]["rank_tol"].as_f64(), Some(1e-6));
    assert_eq!(doc["config"]["seed"], 7);
    assert_eq!(doc["dim"], 5);
    assert_eq!(report::to_canonical_string(&doc), text);
}

#[test]
fn cross_check_failure_exits_with_two() {
    // A threshold above every singular value makes the rank zero, so dim = q > 1
    // for a product that is not equivalent to z^5.
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"rank_tol": 2.0}"#).unwrap();
    let out = run(&[
        "classify",
        "--zeros",
        "0.1:1,0.3+0.2i:1,-0.4:1,0.2-0.5i:1,-0.1+0.6i:1",
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["cross_check"]["status"], "fail");
}

#[test]
fn malformed_input_exits_with_one() {
    let out = run(&["classify", "--zeros", "0:2,0.5+0.1j:1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("position 12"), "{err}");

    assert_eq!(run(&["dim", "--zeros", "1.2:1"]).status.code(), Some(1));
    assert_eq!(run(&["classify"]).status.code(), Some(1));
    assert_eq!(run(&["partition-enum", "--n", "13"]).status.code(), Some(1));
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let capped = Command::new(env!("CARGO_BIN_EXE_blaschke-lab"))
        .args(["case-suite"])
        .env("BLASCHKE_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(0));
    assert_eq!(capped.stdout, run(&["case-suite"]).stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_blaschke-lab"))
        .args(["partition-enum", "--n", "5"])
        .env("BLASCHKE_LAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
