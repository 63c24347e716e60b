use std::path::Path;

use super::label::{ClassLabel, NUM_CLASSES};
use crate::error::{Error, Result};

pub const POSTERIOR_HEADER: [&str; NUM_CLASSES + 1] = [
    "image_id",
    "anger",
    "disgust",
    "fear",
    "happiness",
    "neutral",
    "sadness",
    "surprise",
];

/// Allowed deviation of a posterior row's sum from 1. Adapters export float32
/// softmax outputs.
pub const POSTERIOR_SUM_TOLERANCE: f64 = 1e-4;

/// A teacher's 7-way class distribution for one image, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub image_id: String,
    pub probs: [f64; NUM_CLASSES],
}

impl Posterior {
    pub fn new(image_id: impl Into<String>, probs: [f64; NUM_CLASSES]) -> Result<Self> {
        let p = Posterior {
            image_id: image_id.into(),
            probs,
        };
        p.validate().map_err(Error::invalid)?;
        Ok(p)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.image_id.is_empty() {
            return Err("empty image_id".into());
        }
        for (c, &p) in ClassLabel::ALL.iter().zip(&self.probs) {
            if !p.is_finite() {
                return Err(format!("non-finite probability for {c}"));
            }
            if p < 0.0 {
                return Err(format!("negative probability {p} for {c}"));
            }
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > POSTERIOR_SUM_TOLERANCE {
            return Err(format!(
                "probabilities sum to {sum}, more than {POSTERIOR_SUM_TOLERANCE} from 1"
            ));
        }
        Ok(())
    }

    pub fn prob(&self, label: ClassLabel) -> f64 {
        self.probs[label.index()]
    }
}

/// Reads a posterior CSV. The header must list the classes in canonical
/// order; a permuted header is rejected rather than reordered.
pub fn load_posteriors(path: impl AsRef<Path>) -> Result<Vec<Posterior>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_posteriors(file, path)
}

pub(crate) fn read_posteriors<R: std::io::Read>(
    reader: R,
    origin: &Path,
) -> Result<Vec<Posterior>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(origin, 1, e.to_string()))?
        .clone();
    if header.iter().ne(POSTERIOR_HEADER.iter().copied()) {
        return Err(Error::parse(
            origin,
            1,
            format!(
                "header must be `{}`, found `{}`",
                POSTERIOR_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(origin, line, e.to_string()))?;
        let mut probs = [0.0; NUM_CLASSES];
        for (k, slot) in probs.iter_mut().enumerate() {
            let field = &row[k + 1];
            *slot = field
                .parse()
                .map_err(|_| Error::parse(origin, line, format!("bad probability {field:?}")))?;
        }
        let p = Posterior {
            image_id: row[0].to_string(),
            probs,
        };
        p.validate().map_err(|m| Error::parse(origin, line, m))?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_posteriors(posteriors: &[Posterior], path: impl AsRef<Path>) -> Result<()> {
    let mut text = POSTERIOR_HEADER.join(",");
    text.push('\n');
    for p in posteriors {
        text.push_str(&p.image_id);
        for v in &p.probs {
            text.push(',');
            text.push_str(&v.to_string());
        }
        text.push('\n');
    }
    super::write_file(path.as_ref(), text.as_bytes())
}
