//! Buffered run outputs and the manifest that records them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use antibunch::model::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn admits(self, kind: Kind) -> bool {
        matches!(
            (self, kind),
            (Format::All, _) | (Format::Csv, Kind::Csv) | (Format::Json, Kind::Json) | (Format::Svg, Kind::Svg)
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub label: String,
    pub sha256: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub configurations: Vec<ConfigRecord>,
    pub files: Vec<FileRecord>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    /// Checks that every listed file exists under `dir` with the recorded hash.
    pub fn verify(&self, dir: &Path) -> Result<(), String> {
        for f in &self.files {
            let bytes = fs::read(dir.join(&f.path)).map_err(|e| format!("{}: {e}", f.path))?;
            if sha256_hex(&bytes) != f.sha256 {
                return Err(format!("{}: content does not match recorded hash", f.path));
            }
        }
        Ok(())
    }
}

/// Files produced by one command, held in memory until the run finishes.
pub struct Output {
    command: String,
    format: Format,
    started: Instant,
    configs: Vec<ConfigRecord>,
    files: Vec<(String, Vec<u8>)>,
}

impl Output {
    pub fn new(command: impl Into<String>, format: Format) -> Self {
        Output { command: command.into(), format, started: Instant::now(), configs: Vec::new(), files: Vec::new() }
    }

    pub fn config(&mut self, label: impl Into<String>, config: &Config) {
        self.configs.push(ConfigRecord { label: label.into(), sha256: config.digest(), text: config.to_string() });
    }

    pub fn add(&mut self, name: impl Into<String>, kind: Kind, content: impl Into<Vec<u8>>) {
        if self.format.admits(kind) {
            self.files.push((name.into(), content.into()));
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Writes every file and then the manifest, returning the manifest path.
    pub fn finish(self, dir: &Path) -> std::io::Result<(PathBuf, RunManifest)> {
        fs::create_dir_all(dir)?;
        let mut records = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
            records.push(FileRecord { path: name.clone(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
        }
        let manifest = RunManifest {
            command: self.command.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            configurations: self.configs,
            files: records,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        let stem = self.command.split_whitespace().take(2).collect::<Vec<_>>().join("-");
        let path = dir.join(format!("manifest-{stem}.json"));
        fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
        Ok((path, manifest))
    }
}
