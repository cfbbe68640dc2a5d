use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn program(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "lax", "programs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn lax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lax")).args(args).env_remove("LAX_MAX_STEPS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json_lines(bytes: &[u8]) -> Vec<Value> {
    String::from_utf8_lossy(bytes).lines().map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{}: {}", e, l))).collect()
}

#[test]
fn check_prints_the_type() {
    let o = lax(&["check", &program("or.lax")]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "Bool -> Bool -> Bool");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&lax(&["bogus"])), 1);
    assert_eq!(code(&lax(&["check", "/nonexistent.lax"])), 1);
    assert_eq!(code(&lax(&["normalize", "--max-steps", "1", &program("mobility.lax")])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_lax"))
        .args(["normalize", &program("mobility.lax")])
        .env("LAX_MAX_STEPS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert_eq!(code(&lax(&["normalize", "--max-trace-size", "10", &program("mobility.lax")])), 2);
}

#[test]
fn type_errors_exit_with_input_status() {
    let dir = std::env::temp_dir().join(format!("lax-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.lax");
    std::fs::write(&bad, r"(\x:A. x) (\y:A. y)").unwrap();
    let o = lax(&["--format", "json", "check", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = &json_lines(&o.stderr)[0];
    assert_eq!(err["ok"], false);
    assert_eq!(err["error"], "type");
    assert_eq!(err["errors"][0]["code"], "TypeMismatch");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn json_mode_writes_only_json() {
    let o = lax(&["--format", "json", "normalize", "--trace", "--audit", &program("scheduler_c3.lax")]);
    assert_eq!(code(&o), 0);
    let lines = json_lines(&o.stdout);
    let result = lines.iter().find(|l| l.get("ok").is_some()).unwrap();
    assert_eq!(result["ok"], true);
    let steps = lines.iter().filter(|l| l.get("rule").is_some()).count();
    assert_eq!(result["steps"].as_u64().unwrap() as usize, steps);
    assert_eq!(lines.last().unwrap()["audit"]["holds"], true);
    let o = lax(&["--format", "json", "bogus"]);
    assert_eq!(json_lines(&o.stderr)[0]["error"], "usage");
}

#[test]
fn output_is_reproducible() {
    let args = ["--format", "json", "fuzz", "--seed", "7", "--count", "20", "--size", "30", "--axiom", "C3"];
    let a = lax(&args);
    let b = lax(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fuzz_accepts_an_empty_corpus() {
    assert_eq!(code(&lax(&["fuzz", "--size", "0"])), 0);
}

#[test]
fn examples_match_their_normal_forms() {
    assert_eq!(code(&lax(&["examples"])), 0);
    assert_eq!(code(&lax(&["examples", "--disable-broadcast"])), 1);
}
