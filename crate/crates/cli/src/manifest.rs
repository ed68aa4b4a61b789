//! Run manifests: settings plus content hashes of every input and output.
//! No timestamps or absolute output paths, so identical runs produce identical manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub command: &'static str,
    pub settings: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    /// Hash over the input and output hashes.
    pub content_hash: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Manifest {
            tool: TOOL,
            command,
            settings: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            content_hash: String::new(),
        }
    }

    pub fn setting(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.settings
            .insert(key.to_string(), serde_json::to_value(value).expect("settings serialize"));
        self
    }

    /// Records an input file; files inside `out_dir` are named relative to it.
    pub fn input(&mut self, out_dir: &Path, path: &Path) -> Result<&mut Self> {
        let shown = path.strip_prefix(out_dir).unwrap_or(path);
        self.inputs.push(FileHash {
            path: shown.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(self)
    }

    /// Records an output file, named relative to the output directory.
    pub fn output(&mut self, out_dir: &Path, path: &Path) -> Result<&mut Self> {
        let rel = path.strip_prefix(out_dir).unwrap_or(path);
        self.outputs.push(FileHash {
            path: rel.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(self)
    }

    /// Finalizes the content hash and writes `<out_dir>/<name>`.
    pub fn write(mut self, out_dir: &Path, name: &str) -> Result<()> {
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let mut h = Sha256::new();
        for f in self.inputs.iter().chain(&self.outputs) {
            h.update(f.path.as_bytes());
            h.update([0]);
            h.update(f.sha256.as_bytes());
            h.update([0]);
        }
        self.content_hash = hex::encode(h.finalize());
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        let path = out_dir.join(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}
