use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"EMB1";
const HEADER_LEN: usize = 12;

/// A `count x dim` row-major float32 matrix with one image id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    vectors: Vec<f32>,
    ids: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdLine {
    image_id: String,
}

impl EmbeddingSet {
    pub fn new(dim: usize, vectors: Vec<f32>, ids: Vec<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dim must be positive"));
        }
        if ids.is_empty() {
            return Err(Error::invalid(
                "embedding set must contain at least one row",
            ));
        }
        if vectors.len() != ids.len() * dim {
            return Err(Error::invalid(format!(
                "{} ids but {} values for dim {dim}",
                ids.len(),
                vectors.len()
            )));
        }
        if let Some(pos) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value in row {}",
                pos / dim
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::invalid(format!("duplicate embedding id {id:?}")));
            }
        }
        Ok(EmbeddingSet { dim, vectors, ids })
    }

    /// Builds a set from rows, naming them `row_000000`, `row_000001`, ...
    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("ragged embedding rows"));
        }
        let ids = (0..rows.len()).map(|i| format!("row_{i:06}")).collect();
        Self::new(dim, rows.concat(), ids)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.vectors.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.vectors
    }
}

/// Path of the id sidecar for an embedding file: `<path>.ids.jsonl`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".ids.jsonl");
    PathBuf::from(s)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(path, "truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::format(path, "bad magic, expected EMB1"));
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::format(path, "header size overflow"))?;
    if bytes.len() < expected {
        return Err(Error::format(
            path,
            format!("truncated payload: {} of {expected} bytes", bytes.len()),
        ));
    }
    if bytes.len() > expected {
        return Err(Error::format(
            path,
            format!("{} trailing bytes after payload", bytes.len() - expected),
        ));
    }
    let vectors: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let ids_path = sidecar_path(path);
    let text = std::fs::read_to_string(&ids_path).map_err(|e| Error::io(&ids_path, e))?;
    let mut ids = Vec::with_capacity(count);
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let id: IdLine = serde_json::from_str(line)
            .map_err(|e| Error::parse(&ids_path, i + 1, e.to_string()))?;
        ids.push(id.image_id);
    }
    if ids.len() != count {
        return Err(Error::format(
            &ids_path,
            format!("{} ids for {count} embedding rows", ids.len()),
        ));
    }
    EmbeddingSet::new(dim, vectors, ids).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(HEADER_LEN + set.vectors.len() * 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(set.count() as u32).to_le_bytes());
    bytes.extend_from_slice(&(set.dim as u32).to_le_bytes());
    for v in &set.vectors {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut ids = String::new();
    for id in &set.ids {
        ids.push_str(
            &serde_json::to_string(&IdLine {
                image_id: id.clone(),
            })
            .unwrap(),
        );
        ids.push('\n');
    }
    super::write_file(path, &bytes)?;
    super::write_file(&sidecar_path(path), ids.as_bytes())
}
