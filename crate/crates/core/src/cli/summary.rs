use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::seed::sha256_hex;

/// Machine-readable record of one run. Contains nothing time- or
/// host-dependent, so identical runs write identical summaries.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub subcommand: String,
    pub seed: u64,
    pub workers: Option<usize>,
    /// Input path as given, mapped to its SHA-256 digest.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, u64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Digest of a file, or of a directory's sorted `(relative path, digest)` list.
pub fn digest_path(path: &Path) -> Result<String> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_file() {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        return Ok(sha256_hex(&bytes));
    }
    let mut entries: Vec<(String, String)> = Vec::new();
    let mut stack: Vec<PathBuf> = vec![path.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p
                    .strip_prefix(path)
                    .unwrap_or(&p)
                    .to_string_lossy()
                    .replace('\\', "/");
                entries.push((rel, digest_path(&p)?));
            }
        }
    }
    entries.sort();
    let listing: String = entries.iter().map(|(n, d)| format!("{n}\t{d}\n")).collect();
    Ok(sha256_hex(listing.as_bytes()))
}

impl RunSummary {
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = digest_path(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn output(&mut self, name: &str, count: u64) {
        self.outputs.insert(name.to_string(), count);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}
