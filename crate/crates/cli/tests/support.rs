//! Temporary configurations pointing at the bundled data, with a private
//! snapshot directory per test.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn fdl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fdl"))
}

pub fn run(args: &[&str]) -> Output {
    fdl().args(args).output().unwrap()
}

pub fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr)))
}

/// Writes `fdl.json` into `dir` using `data_dir` for records and the bundled
/// ontology, templates and lexicon.
pub fn write_config(dir: &Path, data_dir: &Path) -> PathBuf {
    let data = repo_root().join("data");
    let config = serde_json::json!({
        "data_dir": data_dir,
        "ontology_path": data.join("ontology.json"),
        "templates_path": data.join("templates.json"),
        "lexicon_path": data.join("lexicon.json"),
        "snapshot_dir": dir.join("snapshot"),
    });
    let path = dir.join("fdl.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

pub fn bundled_config(dir: &Path) -> PathBuf {
    write_config(dir, &repo_root().join("data"))
}
