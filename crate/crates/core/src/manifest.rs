//! Provenance record written next to every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: Vec<String>,
    pub seed: u64,
    /// Digest of the `--config` file, if one was given.
    pub config_hash: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub wall_time_ms: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a file, or of a directory as the sorted list of `relative-path digest` lines.
pub fn digest_path(path: &Path) -> Result<String, Error> {
    if path.is_dir() {
        let mut lines = Vec::new();
        collect(path, path, &mut lines)?;
        lines.sort();
        Ok(sha256_hex(lines.join("\n").as_bytes()))
    } else {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(sha256_hex(&bytes))
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<(), Error> {
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else if !is_manifest(&path) {
            let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            out.push(format!("{rel} {}", digest_path(&path)?));
        }
    }
    Ok(())
}

fn is_manifest(path: &Path) -> bool {
    path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n == "manifest.json" || n.ends_with(".manifest.json"))
}

impl RunManifest {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed,
            config_hash: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            wall_time_ms: 0,
        }
    }

    pub fn config(&mut self, path: &Path) -> Result<&mut Self, Error> {
        self.config_hash = Some(digest_path(path)?);
        Ok(self)
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self, Error> {
        self.inputs.insert(path.display().to_string(), digest_path(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> Result<&mut Self, Error> {
        self.outputs.insert(path.display().to_string(), digest_path(path)?);
        Ok(self)
    }

    /// `out.jsonl` gets `out.jsonl.manifest.json`; a directory gets `dir/manifest.json`.
    pub fn location_for(output: &Path) -> PathBuf {
        if output.is_dir() {
            output.join("manifest.json")
        } else {
            let mut name = output.file_name().unwrap_or_default().to_os_string();
            name.push(".manifest.json");
            output.with_file_name(name)
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        let mut text = serde_json::to_string_pretty(self).expect("manifests serialize");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// The manifest with its wall time cleared, for comparing runs.
    pub fn without_time(&self) -> Self {
        Self { wall_time_ms: 0, ..self.clone() }
    }
}
