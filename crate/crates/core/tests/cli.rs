use std::path::PathBuf;
use std::process::{Command, Output};

use jetphase::json::JsonFormat;
use jetphase::operator::FormalOperator;
use serde_json::Value;

fn jetphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetphase"))
        .args(args)
        .env_remove("JETPHASE_MAX_DEGREE")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jetphase-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const GAUSSIAN: &str = r#"{"num_vars":1,"phase":{"num_vars":1,"terms":[{"nu":-1,"x":[2],"c":"1/2"}]},"u":{"num_vars":1,"terms":[]}}"#;

#[test]
fn gaussian_distribution() {
    let pair = scratch("gaussian.json", GAUSSIAN);
    let out = jetphase(&["foi", "distribution", "--pair", pair.to_str().unwrap(), "--order", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "{\"num_vars\":1,\"terms\":[{\"nu\":0,\"dx\":[0],\"c\":\"1\"},{\"nu\":1,\"dx\":[2],\"c\":\"-1/2\"},{\"nu\":2,\"dx\":[4],\"c\":\"1/8\"}]}\n"
    );
}

#[test]
fn non_oscillatory_check_fails_assert() {
    let d = scratch("cube.json", r#"{"num_vars":1,"terms":[{"nu":0,"dx":[0],"c":"1"},{"nu":1,"dx":[3],"c":"1"},{"nu":2,"dx":[6],"c":"1/2"}]}"#);
    let args = ["osc", "check", "--distribution", d.to_str().unwrap(), "--order", "3"];
    let out = jetphase(&[&args[..], &["--assert"]].concat());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["oscillatory"], Value::Bool(false));
    assert_eq!(jetphase(&args).status.code(), Some(0));
}

#[test]
fn oscillatory_check_passes_assert() {
    let pair = scratch("gaussian-osc.json", GAUSSIAN);
    let dist = jetphase(&["foi", "distribution", "--pair", pair.to_str().unwrap(), "-N", "3"]);
    let d = scratch("gaussian-dist.json", std::str::from_utf8(&dist.stdout).unwrap());
    let out = jetphase(&["osc", "check", "--distribution", d.to_str().unwrap(), "-N", "3", "--assert"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["x"]["terms"][0]["c"], Value::String("-1/2".into()));
    let back = jetphase(&["foi", "recover", "--distribution", d.to_str().unwrap(), "-N", "3"]);
    assert_eq!(stdout_json(&back), serde_json::from_str::<Value>(GAUSSIAN).unwrap());
}

#[test]
fn moyal_product() {
    let pi = scratch("pi.json", "[[0, 1], [-1, 0]]");
    let out = jetphase(&["star", "moyal", "--pi", pi.to_str().unwrap(), "--order", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let star = scratch("moyal.json", std::str::from_utf8(&out.stdout).unwrap());
    let x1 = scratch("x1.json", r#"{"num_vars":2,"terms":[{"nu":0,"x":[1,0],"c":"1"}]}"#);
    let x2 = scratch("x2.json", r#"{"num_vars":2,"terms":[{"nu":0,"x":[0,1],"c":"1"}]}"#);
    let out = jetphase(&[
        "star", "mul", "--star", star.to_str().unwrap(), "--lhs", x1.to_str().unwrap(), "--rhs", x2.to_str().unwrap(), "--order", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let terms = stdout_json(&out)["terms"].clone();
    assert!(terms.as_array().unwrap().contains(&serde_json::json!({"nu": 1, "x": [0, 0], "c": "1"})));
    let natural = jetphase(&["star", "natural", "--star", star.to_str().unwrap(), "-N", "2", "--assert"]);
    assert_eq!(natural.status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let pi = scratch("pi-det.json", r#"{"moyal_pi": [["1/2", 1], [-1, 0]]}"#);
    let args = ["star", "two-point", "--star", pi.to_str().unwrap(), "-N", "3"];
    let a = jetphase(&args);
    let b = jetphase(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_flag_writes_file() {
    let pair = scratch("gaussian-out.json", GAUSSIAN);
    let target = pair.with_file_name("written.json");
    let out = jetphase(&["foi", "distribution", "--pair", pair.to_str().unwrap(), "-N", "1", "--output", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(written["terms"][1]["c"], Value::String("-1/2".into()));
}

#[test]
fn input_errors_exit_two() {
    let bad = scratch("bad.json", "{\"num_vars\": 1, \"terms\": [");
    let out = jetphase(&["osc", "check", "--distribution", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], Value::String("ParseError".into()));

    let degenerate = scratch("degenerate.json", r#"{"num_vars":1,"terms":[{"nu":0,"dx":[0],"c":"1"},{"nu":1,"dx":[1],"c":"1"}]}"#);
    let out = jetphase(&["foi", "recover", "--distribution", degenerate.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], Value::String("NondegeneracyError".into()));

    let out = jetphase(&["factor", "--op", bad.to_str().unwrap(), "--split", "xy"]);
    assert_eq!(out.status.code(), Some(2));

    let out = jetphase(&["osc", "frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], Value::String("UsageError".into()));
}

#[test]
fn degree_limit() {
    let pair = scratch("gaussian-limit.json", GAUSSIAN);
    let out = Command::new(env!("CARGO_BIN_EXE_jetphase"))
        .args(["foi", "distribution", "--pair", pair.to_str().unwrap(), "-N", "4"])
        .env("JETPHASE_MAX_DEGREE", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], Value::String("LimitExceededError".into()));
    assert_eq!(jetphase(&["foi", "distribution", "--pair", pair.to_str().unwrap(), "-N", "65"]).status.code(), Some(2));
}

#[test]
fn operator_and_factor_verbs() {
    let op = r#"{"num_vars":1,"terms":[{"nu":1,"x":[1],"dx":[0],"c":"1"},{"nu":1,"x":[0],"dx":[1],"c":"1"}]}"#;
    let e = jetphase(&["op", "exp", "--op", op, "-N", "2"]);
    assert_eq!(e.status.code(), Some(0));
    let g = scratch("g.json", std::str::from_utf8(&e.stdout).unwrap());
    let f = jetphase(&["factor", "--op", g.to_str().unwrap(), "--split", "ab", "-N", "2"]);
    assert_eq!(f.status.code(), Some(0));
    let doc = stdout_json(&f);
    let a = scratch("a.json", &doc["a"].to_string());
    let b = scratch("b.json", &doc["b"].to_string());
    let back = jetphase(&["op", "compose", "--lhs", a.to_str().unwrap(), "--rhs", b.to_str().unwrap(), "-N", "2"]);
    assert_eq!(stdout_json(&back), stdout_json(&e));
    let log = jetphase(&["op", "log", "--op", g.to_str().unwrap(), "-N", "2"]);
    let parse = |text: &str| FormalOperator::from_json_str(text).unwrap();
    assert_eq!(parse(std::str::from_utf8(&log.stdout).unwrap()), parse(op));
    let nat = jetphase(&["op", "natural", "--op", op, "--assert"]);
    assert_eq!(nat.status.code(), Some(0));
    let sym = jetphase(&["op", "symbol", "--op", op]);
    assert_eq!(stdout_json(&sym)["aux"], serde_json::json!(["xi1"]));
}
