use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// Written as `manifest.json` next to the outputs of every run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub config_sha256: Option<String>,
    pub master_seed: Option<u64>,
    pub threads: Option<usize>,
    pub engine_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Output directory that records what was written into it.
pub struct OutputDir {
    root: PathBuf,
    manifest: RunManifest,
}

impl OutputDir {
    pub fn create(root: PathBuf, command: &str, threads: Option<usize>) -> CliResult<Self> {
        std::fs::create_dir_all(&root)?;
        Ok(OutputDir {
            root,
            manifest: RunManifest {
                command: command.to_string(),
                config_path: None,
                config_sha256: None,
                master_seed: None,
                threads,
                engine_version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix: now(),
                finished_unix: 0,
                outputs: Vec::new(),
            },
        })
    }

    pub fn record_config(&mut self, path: &Path, bytes: &[u8], master_seed: u64) {
        self.manifest.config_path = Some(path.display().to_string());
        self.manifest.config_sha256 = Some(sha256_hex(bytes));
        self.manifest.master_seed = Some(master_seed);
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes)?;
        self.manifest.outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn finish(mut self) -> CliResult<RunManifest> {
        self.manifest.finished_unix = now();
        let mut text = serde_json::to_vec_pretty(&self.manifest).map_err(dilemma_core::Error::from)?;
        text.push(b'\n');
        std::fs::write(self.root.join(MANIFEST_FILE), text)?;
        Ok(self.manifest)
    }
}
