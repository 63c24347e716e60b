//! Domain types shared by every pipeline, plus the exchange-file readers and
//! writers: JSONL manifests, posterior CSVs and `EMB1` embedding files.

mod embedding;
mod label;
mod manifest;
mod posterior;

pub use embedding::{load_embeddings, write_embeddings, EmbeddingSet};
pub use label::{ClassCounts, ClassLabel, NUM_CLASSES};
pub use manifest::{load_manifest, parse_manifest, write_manifest, ImageRecord, Manifest, Split};
pub use posterior::{
    load_posteriors, write_posteriors, Posterior, POSTERIOR_HEADER, POSTERIOR_SUM_TOLERANCE,
};

pub use embedding::sidecar_path;

use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to `path` through a sibling temp file and a rename, creating
/// parent directories as needed.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
