use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fv")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn sig() -> Value {
    json!({
        "preds": [{"name": "P", "arity": 1, "lipschitz": "1"}],
        "funcs": [],
        "consts": ["c"]
    })
}

fn structure(p_a: &str, p_b: &str) -> Value {
    json!({
        "universe": ["a", "b"],
        "dist": [["0", "1"], ["1", "0"]],
        "preds": {"P": [p_a, p_b]},
        "funcs": {},
        "consts": {"c": "a"}
    })
}

#[test]
fn translate_prints_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let sig = write(dir.path(), "sig.json", &sig());
    let out = fv(&["translate", "--formula", "sup x . P(x)", "--n", "1", "--sig", &sig]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 1);
    assert_eq!(v["m"], 1);
    assert_eq!(v["sigmas"].as_array().unwrap().len(), 3);
    assert_eq!(v["psis"], json!(["sup x . P(x)"]));
    assert_eq!(v["variable_convention"], "y[j][i]");
}

#[test]
fn eval_structure_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", &structure("3/4", "1/4"));
    let out = fv(&["eval", "--structure", &s, "--formula", "P(c)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "3/4");
}

#[test]
fn family_eval_rp_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let fam = json!({
        "ideal": {"omega": ["g1", "g2", "g3"], "generators": [["g1"]]},
        "signature": sig(),
        "structures": {
            "g1": structure("1", "1"),
            "g2": structure("1/2", "0"),
            "g3": structure("1/4", "0")
        }
    });
    let fam = write(dir.path(), "fam.json", &fam);
    // g1 is negligible, so P(c) is the max over g2, g3
    let out = fv(&["eval", "--family", &fam, "--formula", "P(c)"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1/2");

    let ideal = write(dir.path(), "ideal.json", &json!({"omega": ["g1", "g2", "g3"], "generators": []}));
    let out = fv(&["eval", "--family", &fam, "--ideal", &ideal, "--formula", "P(c)"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1");

    let out = fv(&["eval", "--family", &fam, "--formula", "sup x . P(x)", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let cert: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cert["value"], "1/2");
    assert!(cert["failures"].as_array().unwrap().is_empty());

    let dump = dir.path().join("rp.json");
    let out = fv(&["rp", "--family", &fam, "--out", dump.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dump).unwrap()).unwrap();
    // quotient by {g1} leaves 2 × 2 classes
    assert_eq!(v["universe"].as_array().unwrap().len(), 4);
    assert_eq!(v["class_map"].as_object().unwrap().len(), 4);
}

#[test]
fn check_small_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("caps.toml");
    std::fs::write(&cfg, "atomic_cases = 50\n").unwrap();
    let out = fv(&["check", "--suite", "atomic", "--seed", "42", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("atomic"));
}

#[test]
fn demo_reports_divisibility() {
    let out = fv(&["demo", "--horizon", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["holds"], true);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(fv(&["translate"]).status.code(), Some(2));
    assert_eq!(fv(&["translate", "--formula", "Q(c)"]).status.code(), Some(2));
    assert_eq!(fv(&["check", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(fv(&["eval", "--structure", "/nonexistent.json", "--formula", "P(c)"]).status.code(), Some(2));
    assert_eq!(fv(&["demo", "--xi", "4"]).status.code(), Some(2));
}
