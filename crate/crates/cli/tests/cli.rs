use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarse-cancel")).current_dir(corpus()).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cc-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn exit_codes() {
    let ok = run(&["delta", "graphs/c4.json"]);
    assert_eq!(ok.status.code(), Some(0));
    let r = report(&ok);
    assert_eq!(r["command"], "delta");
    assert_eq!(r["result"]["delta"], 1.0);

    let failed = run(&["certify", "stats/toy-fail.json", "--constants", "constants/toy.json"]);
    assert_eq!(failed.status.code(), Some(2));
    assert_eq!(report(&failed)["result"]["certificate"]["overall"], false);

    let bad = run(&["delta", "graphs/malformed.json"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("malformed JSON at line"));
    assert!(bad.stdout.is_empty());
}

#[test]
fn output_flag_writes_the_report() {
    let dir = scratch("output");
    let file = dir.join("hol.json");
    let out = run(&["--output", file.to_str().unwrap(), "group", "hol", "groups/z5.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(v["result"]["hol_exponent"], 20);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tree_to_nu_pipeline() {
    let dir = scratch("pipeline");
    let window = dir.join("window.json");
    let table = dir.join("table.json");
    let w = window.to_str().unwrap();
    assert!(run(&["--output", w, "tree", "build", "amalgams/z3z5.json", "--radius", "4", "--max-word-length", "3"]).status.success());
    assert!(run(&["--output", table.to_str().unwrap(), "act", "acyl", w, "--l", "0"]).status.success());

    let nu = report(&run(&["inv", "nu-bound", table.to_str().unwrap(), "--rinj", "2"]));
    assert_eq!(nu["result"]["nu"], 2);

    let ledger = run(&["inv", "ledger", w, "--word-cap", "2", "--max-word-length", "2", "--a-upper", "8"]);
    assert_eq!(ledger.status.code(), Some(0));
    let l = &report(&ledger)["result"]["ledger"];
    assert_eq!(l["e"]["value"], 1);
    assert_eq!(l["rinj"]["value"], 2.0);
    assert_eq!(l["A"]["bound"], "upper");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn classify_reads_the_bundle_word_problem() {
    let ab = report(&run(&["act", "classify", "windows/z3z5-r3.json", "--word", "ab"]));
    assert_eq!(ab["result"]["classification"]["kind"], "LoxodromicEstimate");
    let a = report(&run(&["act", "classify", "windows/z3z5-r3.json", "--word", "a"]));
    assert_eq!(a["result"]["classification"]["kind"], "Elliptic");
}
