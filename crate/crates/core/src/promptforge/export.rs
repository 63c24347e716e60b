use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tables::{format_au_vector, parse_au_vector, ActionUnit};
use super::{PromptSpec, Variant};
use crate::dataset::ClassLabel;
use crate::error::{Error, Result};

pub const PROMPT_CSV_HEADER: [&str; 11] = [
    "expression",
    "age",
    "gender",
    "race",
    "head_pose",
    "cue_format",
    "identity_trait",
    "variant",
    "seed",
    "au_vector",
    "prompt",
];

/// One row of the prompt CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRow {
    pub expression: ClassLabel,
    pub age: String,
    pub gender: String,
    pub race: String,
    pub head_pose: String,
    pub cue_format: String,
    pub identity_trait: String,
    pub variant: Variant,
    pub seed: u64,
    /// `AU6:1.0;AU12:1.0`; empty for `sd` rows.
    pub au_vector: String,
    pub prompt: String,
}

impl PromptRow {
    pub fn au_units(&self) -> std::result::Result<Option<Vec<ActionUnit>>, String> {
        match self.variant {
            Variant::Sd => Ok(None),
            _ => parse_au_vector(&self.au_vector).map(Some),
        }
    }
}

impl From<&PromptSpec> for PromptRow {
    fn from(s: &PromptSpec) -> Self {
        let f = &s.factors;
        PromptRow {
            expression: f.expression.label,
            age: f.age.key.clone(),
            gender: f.gender.key.clone(),
            race: f.race.key.clone(),
            head_pose: f.head_pose.key.clone(),
            cue_format: f.cue_format.name().to_string(),
            identity_trait: s.identity_trait.clone(),
            variant: s.variant,
            seed: s.seed,
            au_vector: s
                .au_vector
                .as_deref()
                .map(format_au_vector)
                .unwrap_or_default(),
            prompt: s.prompt.clone(),
        }
    }
}

pub fn prompt_csv(specs: &[PromptSpec]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(true)
        .from_writer(Vec::new());
    for s in specs {
        // Only strings and integers; serialization into a Vec cannot fail.
        w.serialize(PromptRow::from(s))
            .expect("prompt row serializes");
    }
    w.into_inner().expect("in-memory writer")
}

pub fn write_prompt_csv(specs: &[PromptSpec], path: impl AsRef<Path>) -> Result<()> {
    crate::dataset::write_file(path.as_ref(), &prompt_csv(specs))
}

pub fn load_prompt_csv(path: impl AsRef<Path>) -> Result<Vec<PromptRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if header.iter().ne(PROMPT_CSV_HEADER.iter().copied()) {
        return Err(Error::parse(path, 1, "unexpected prompt CSV header"));
    }
    let mut rows = Vec::new();
    for (i, row) in rdr.deserialize::<PromptRow>().enumerate() {
        let row = row.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        row.au_units().map_err(|m| Error::parse(path, i + 2, m))?;
        rows.push(row);
    }
    Ok(rows)
}
