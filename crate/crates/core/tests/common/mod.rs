#![allow(dead_code)]

pub mod counts;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_codetopics")
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("spawn codetopics")
}

pub fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "codetopics {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// synth → fit → eval with the desk preset into `dir`.
pub fn desk_pipeline(dir: &Path) {
    let preset = workspace_file("presets/desk.toml");
    let (preset, dir_s) = (path_str(&preset), path_str(dir));
    run_ok(&["--config", preset, "--out", dir_s, "synth"]);
    let events = dir.join("events.csv");
    run_ok(&["--config", preset, "--out", dir_s, "fit", "--events", path_str(&events)]);
    let model = dir.join("model.json");
    run_ok(&["--config", preset, "--out", dir_s, "eval", path_str(&model)]);
}
