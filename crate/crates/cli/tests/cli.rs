use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn quadvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadvar")).args(args).env_remove("QUADVAR_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("v.fpnset");
    let out = quadvar(&["gen", "--kind", "layer", "--p", "3", "--n", "5", "--d", "1", "--seed", "7", "--out", s(&set)]);
    assert!(out.status.success());
    let g = json(&out);
    assert_eq!(g["report"]["metrics"]["generator"]["kind"], "layer_variety");
    assert!(set.exists());
    let out = quadvar(&["analyze", s(&set)]);
    assert!(out.status.success());
    let m = &json(&out)["report"]["metrics"];
    for key in ["delta", "epsilon_u2", "c0", "cube_count", "quadruple_count", "spectral_max"] {
        assert!(m.get(key).is_some(), "missing {key}");
    }
    assert!(m["c0"].as_f64().unwrap() >= 0.9);
}

#[test]
fn census_oracle_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("r.fpnset");
    assert!(quadvar(&["gen", "--kind", "random", "--n", "4", "--density", "0.4", "--seed", "3", "--out", s(&set)])
        .status
        .success());
    let out = quadvar(&["census", s(&set), "--oracle", "--config10"]);
    assert!(out.status.success());
    let m = &json(&out)["report"]["metrics"];
    assert_eq!(m["agree"], true);
    assert_eq!(m["fast"], m["oracle"]);
}

#[test]
fn recover_writes_variety() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("v.fpnset");
    let q = dir.path().join("q.fpnset");
    assert!(quadvar(&["gen", "--n", "6", "--seed", "2", "--out", s(&set)]).status.success());
    let out = quadvar(&["recover", s(&set), "--variety-out", s(&q)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["report"]["recovery"];
    assert_eq!(r["status"], "ok");
    assert_eq!(r["overlap"], 1.0);
    assert_eq!(std::fs::read(&q).unwrap().len(), std::fs::read(&set).unwrap().len());
    assert_eq!(quadvar::GSubset::load(&q).unwrap(), quadvar::GSubset::load(&set).unwrap());
}

#[test]
fn refusal_exits_3_and_names_stage() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("r.fpnset");
    assert!(quadvar(&["gen", "--kind", "random", "--n", "6", "--seed", "1", "--out", s(&set)]).status.success());
    let out = quadvar(&["recover", s(&set)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step1"));
    assert_eq!(json(&out)["report"]["recovery"]["status"], "refused");
}

#[test]
fn exit_codes_for_args_and_io() {
    assert_eq!(quadvar(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(quadvar(&["gen", "--p", "notanumber", "--out", "x"]).status.code(), Some(1));
    assert_eq!(quadvar(&["gen", "--p", "4", "--out", "/dev/null"]).status.code(), Some(1));
    assert_eq!(quadvar(&["analyze", "/nonexistent/set.fpnset"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk");
    std::fs::write(&junk, b"not a set file").unwrap();
    assert_eq!(quadvar(&["analyze", s(&junk)]).status.code(), Some(2));
    assert!(quadvar(&["--help"]).status.success());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let set = dir.path().join("v.fpnset");
    std::fs::write(&cfg, format!("kind = \"random\"\nn = 3\ndensity = 0.5\nseed = 4\nout = {:?}\n", s(&set))).unwrap();
    let out = quadvar(&["--config", s(&cfg), "gen", "--n", "4"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["report"]["config"]["n"], 4);
    assert_eq!(r["report"]["config"]["density"], 0.5);
    assert_eq!(r["report"]["metrics"]["n"], 4);
    std::fs::write(&cfg, "colour = 1\n").unwrap();
    assert_eq!(quadvar(&["--config", s(&cfg), "prob"]).status.code(), Some(1));
}

#[test]
fn threads_flag_and_env() {
    assert!(quadvar(&["--threads", "2", "prob", "--n-max", "4"]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_quadvar"))
        .args(["prob", "--n-max", "4"])
        .env("QUADVAR_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn prob_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let out = quadvar(&["prob", "--p", "5", "--n-max", "6", "--samples", "500", "--csv", s(&csv)]);
    assert!(out.status.success());
    let m = &json(&out)["report"]["metrics"];
    assert_eq!(m["sandwich_holds"], true);
    let rows = m["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["m"].as_u64().unwrap() + r["d"].as_u64().unwrap() <= r["n"].as_u64().unwrap()));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().next().unwrap().contains("exact"));
    assert_eq!(text.lines().count(), rows.len() + 1);
}

#[test]
fn verify_passes_on_generated_sets() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("v.fpnset");
    assert!(quadvar(&["gen", "--kind", "sidon", "--n", "4", "--t-dim", "2", "--out", s(&set)]).status.success());
    let out = quadvar(&["verify", s(&set)]);
    assert!(out.status.success());
    assert_eq!(json(&out)["report"]["metrics"]["all_pass"], true);
}
