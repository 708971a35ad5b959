//! Helpers shared by the CLI integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anchoragg"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Writes `json` to `dir/name` and returns the path.
pub fn write_file(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

/// A small tournament: a dozen questions, half ordinal, two machines.
pub const SMALL_DATA: &str = r#"{
  "n_questions": 12,
  "n_humans": 30,
  "participants_per_question": 8,
  "min_duration_days": 3,
  "max_duration_days": 6,
  "seed": 5
}"#;

/// Few epochs so the attention commands finish quickly.
pub const QUICK_TRAIN: &str = r#"{"max_epochs": 3}"#;

/// Generates data from `config_json` into `dir/data`.
pub fn generate(dir: &Path, config_json: &str) -> PathBuf {
    let cfg = write_file(dir, "synth.json", config_json);
    let data = dir.join("data");
    let out = run(&["generate", "--config", path_str(&cfg), "--out", path_str(&data)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    data
}

/// Every file under `dir`, keyed by relative path. The manifest's creation
/// time is dropped.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
                continue;
            }
            let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
            let mut bytes = fs::read(&p).unwrap();
            if rel.ends_with("manifest.json") {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                v.as_object_mut().unwrap().remove("created_at");
                bytes = serde_json::to_vec_pretty(&v).unwrap();
            }
            files.insert(rel, bytes);
        }
    }
    files
}
