//! Provenance manifests written next to every output file.
//!
//! A manifest is pretty-printed JSON with the command, the tool version,
//! SHA-256 checksums of inputs and outputs, the run parameters and a
//! command-specific summary. It holds no timestamps, so reruns with the same
//! inputs produce identical manifests.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileEntry {
    pub fn of(path: &Path) -> Result<Self, Failure> {
        let data = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: sha256_hex(&data),
            bytes: data.len() as u64,
        })
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct Manifest<P: Serialize, S: Serialize> {
    pub command: &'static str,
    pub tool_version: &'static str,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub parameters: P,
    pub summary: S,
}

impl<P: Serialize, S: Serialize> Manifest<P, S> {
    pub fn new(command: &'static str, parameters: P, summary: S) -> Self {
        Self {
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: Vec::new(),
            outputs: Vec::new(),
            parameters,
            summary,
        }
    }

    pub fn input(mut self, path: &Path) -> Result<Self, Failure> {
        self.inputs.push(FileEntry::of(path)?);
        Ok(self)
    }

    pub fn output(mut self, path: &Path) -> Result<Self, Failure> {
        self.outputs.push(FileEntry::of(path)?);
        Ok(self)
    }

    /// Writes the manifest to `<primary>.manifest.json` and returns that path.
    pub fn write_beside(&self, primary: &Path) -> Result<PathBuf, Failure> {
        let path = sidecar(primary, "manifest.json");
        write_json(&path, self)?;
        Ok(path)
    }
}

/// `out.csv` → `out.csv.<suffix>`.
pub fn sidecar(primary: &Path, suffix: &str) -> PathBuf {
    let mut s = primary.as_os_str().to_os_string();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("manifest values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}
