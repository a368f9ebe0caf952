use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semilab")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("semilab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn indices_of_a_square() {
    let out = run(&["indices", "--f", "power:2", "--N", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "indices");
    let ix = &v["result"]["indices"];
    for key in ["lower", "upper", "second"] {
        assert_eq!(ix[key].as_f64(), Some(2.0));
    }
    let p = v["result"]["exponents"]["p"].as_f64().unwrap();
    assert!((p - 7.0 / 3.0).abs() < 1e-15);
    assert_eq!(v["result"]["exponents"]["p_s"].as_f64(), Some(3.0));
}

#[test]
fn certify_and_verify_pass() {
    let out = run(&["certify", "--f", "power:2", "--N", "4", "--theorem", "1.9"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["result"]["verification"]["worst_margin"].as_f64().unwrap() > 0.0);

    let out = run(&["verify", "--f", "power:2", "--space", "flat:4", "--theorem", "1.9"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["pass"], true);
    assert!(v["result"]["ratio"].as_f64().unwrap() <= 1.0);
}

#[test]
fn appendix_sharpness() {
    let out = run(&["appendix", "--N", "5", "--alpha", "2", "--K", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"n\": 4"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["indices", "--f", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["indices", "--f", "power:2", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["certify", "--f", "power:5", "--N", "4", "--theorem", "1.9"]).status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let args = ["certify", "--f", "power:1.5", "--N", "5", "--theorem", "1.9"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn config_file_matches_flags() {
    let path = scratch("indices.json");
    std::fs::write(&path, r#"{"f": "power:2", "N": 4}"#).unwrap();
    let from_file = run(&["indices", "--config", path.to_str().unwrap()]);
    let from_flags = run(&["indices", "--f", "power:2", "--N", "4"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_flags.stdout);

    std::fs::write(&path, r#"{"f": "power:2", "bogus": 1}"#).unwrap();
    assert_eq!(run(&["indices", "--config", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report() {
    let path = scratch("report.json");
    let out = run(&["indices", "--f", "power:3", "--N", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["indices"]["upper"].as_f64(), Some(3.0));
}
