use std::path::Path;
use std::process::{Command, Output};

use walkdir::WalkDir;

fn fiberslice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiberslice"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = fiberslice(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(root).unwrap().to_string_lossy().into_owned();
            (rel, std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_then_run_stage_by_stage() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bar");
    let config = ok(&["generate", "--model", "bar", "--out", s(&model)]);
    let config = config.trim();
    let out = dir.path().join("staged");
    for stage in ["stress", "psl", "slice", "paths", "metrics"] {
        let printed = ok(&[stage, "--config", config, "--out", s(&out)]);
        assert!(printed.starts_with(&format!("{stage}: ")), "{printed}");
    }
    assert!(out.join("waypoints.csv").is_file());
    assert!(out.join("layers/layer_0000.obj").is_file());
    assert!(out.join("reports/alignment.toml").is_file());
}

#[test]
fn runs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bolted");
    let config = ok(&["generate", "--model", "bolted-bar", "--out", s(&model)]);
    let config = config.trim();
    let mut trees = Vec::new();
    for (i, threads) in ["1", "8", "1", "8"].into_iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        ok(&["run", "--config", config, "--out", s(&out), "--threads", threads]);
        trees.push(tree(&out));
    }
    assert!(trees[0].len() > 10);
    for t in &trees[1..] {
        assert!(t == &trees[0]);
    }
}

#[test]
fn both_stress_sources_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bar");
    let config = ok(&["generate", "--model", "bar", "--out", s(&model)]);
    let mut text = std::fs::read_to_string(config.trim()).unwrap();
    assert!(text.contains("[stress.bc]"));
    text = text.replacen("[stress.bc]", "[stress]\ncsv = \"stress.csv\"\n\n[stress.bc]", 1);
    let bad = model.join("bad.toml");
    std::fs::write(&bad, text).unwrap();
    let out = dir.path().join("never");
    let res = fiberslice(&["run", "--config", s(&bad), "--out", s(&out)]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("not both"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_model_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = fiberslice(&["generate", "--model", "teapot", "--out", s(dir.path())]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("unknown model"));
}
