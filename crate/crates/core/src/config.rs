//! Service configuration file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::rank::{MergePolicy, RankError};

fn default_host() -> String {
    "127.0.0.1".to_string()
}

fn default_port() -> u16 {
    8080
}

fn default_k() -> usize {
    10
}

fn default_snapshot_dir() -> PathBuf {
    PathBuf::from("snapshot")
}

fn default_min_gained() -> usize {
    20
}

/// JSON configuration. Relative paths are resolved against the directory
/// holding the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub data_dir: PathBuf,
    pub ontology_path: PathBuf,
    pub templates_path: PathBuf,
    pub lexicon_path: PathBuf,
    #[serde(default)]
    pub policy: MergePolicy,
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_k")]
    pub default_k: usize,
    /// Where `ingest` writes the graph and index snapshot.
    #[serde(default = "default_snapshot_dir")]
    pub snapshot_dir: PathBuf,
    /// Gained-coverage threshold used by `eval` unless overridden.
    #[serde(default = "default_min_gained")]
    pub min_gained: usize,
    /// Accept dangling references and ontology violations at ingest.
    #[serde(default)]
    pub lenient: bool,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("config: {field} path {path} does not exist")]
    MissingPath { field: &'static str, path: PathBuf },
    #[error("config: default_k must be at least 1")]
    BadK,
    #[error("config: {0}")]
    Policy(#[from] RankError),
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: Config = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_relative_to(base);
        config.check()?;
        Ok(config)
    }

    pub fn resolve_relative_to(&mut self, base: &Path) {
        for p in [
            &mut self.data_dir,
            &mut self.ontology_path,
            &mut self.templates_path,
            &mut self.lexicon_path,
            &mut self.snapshot_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        for (field, path) in [
            ("data_dir", &self.data_dir),
            ("ontology_path", &self.ontology_path),
            ("templates_path", &self.templates_path),
            ("lexicon_path", &self.lexicon_path),
        ] {
            if !path.exists() {
                return Err(ConfigError::MissingPath {
                    field,
                    path: path.clone(),
                });
            }
        }
        if self.default_k < 1 {
            return Err(ConfigError::BadK);
        }
        self.policy.validate()?;
        Ok(())
    }
}
