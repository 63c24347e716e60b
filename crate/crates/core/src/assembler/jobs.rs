use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::Regime;
use crate::dataset::{ClassLabel, ImageRecord, Manifest, Split, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::imageops::{augment_one, encode_png, load_image, AugmentPolicy};
use crate::seed;

/// Source tag of augmented copies in assembled manifests.
pub const AUGMENTED_SOURCE: &str = "augmented";

pub const JOBS_HEADER: [&str; 6] = [
    "output_id",
    "source_id",
    "source_path",
    "label",
    "seed",
    "output_path",
];

/// One augmented copy to produce: which image, and the seed of its policy draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentJob {
    pub output_id: String,
    pub source_id: String,
    pub source_path: String,
    pub label: ClassLabel,
    pub seed: u64,
    pub output_path: String,
}

impl AugmentJob {
    pub fn record(&self) -> ImageRecord {
        ImageRecord::new(
            &self.output_id,
            &self.output_path,
            AUGMENTED_SOURCE,
            self.label,
            Split::Train,
        )
    }
}

/// Number of augmented copies each class needs.
pub fn augment_targets(real: &Manifest, regime: Regime, cap: u64) -> Result<[u64; NUM_CLASSES]> {
    let counts = real.class_counts();
    match regime {
        Regime::Addon => {
            let majority = counts.iter().copied().max().unwrap_or(0);
            Ok(counts.map(|c| majority - c))
        }
        Regime::Allaug => {
            if let Some(c) = ClassLabel::ALL
                .into_iter()
                .find(|c| counts[c.index()] > cap)
            {
                return Err(Error::invalid(format!(
                    "allaug cap {cap} is below the {} real records of {c}",
                    counts[c.index()]
                )));
            }
            Ok(counts.map(|c| cap - c))
        }
        other => Err(Error::invalid(format!(
            "regime {other} does not emit augmentation jobs"
        ))),
    }
}

/// Jobs that balance `real` under `regime`. Within a class, source images are
/// taken round-robin in image-id order, so repeats of any one image differ
/// by at most one.
pub fn emit_augment_jobs(
    real: &Manifest,
    regime: Regime,
    cap: u64,
    seed: u64,
) -> Result<Vec<AugmentJob>> {
    let targets = augment_targets(real, regime, cap)?;
    let mut jobs = Vec::new();
    for class in ClassLabel::ALL {
        let need = targets[class.index()] as usize;
        if need == 0 {
            continue;
        }
        let mut members: Vec<&ImageRecord> = real.iter().filter(|r| r.label == class).collect();
        if members.is_empty() {
            return Err(Error::invalid(format!(
                "cannot augment {class}: no real records"
            )));
        }
        members.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        for j in 0..need {
            let src = members[j % members.len()];
            let output_id = format!("{}__aug{:04}", src.image_id, j / members.len());
            jobs.push(AugmentJob {
                seed: seed::derive(seed, &format!("augment-job/{output_id}")),
                output_path: format!("augmented/{output_id}.png"),
                output_id,
                source_id: src.image_id.clone(),
                source_path: src.path.clone(),
                label: class,
            });
        }
    }
    Ok(jobs)
}

pub fn jobs_csv(jobs: &[AugmentJob]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if jobs.is_empty() {
        w.write_record(JOBS_HEADER)
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    for j in jobs {
        w.serialize(j).map_err(|e| Error::invalid(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::invalid(e.to_string()))
}

pub fn write_jobs(jobs: &[AugmentJob], path: impl AsRef<Path>) -> Result<()> {
    crate::dataset::write_file(path.as_ref(), &jobs_csv(jobs)?)
}

pub fn load_jobs(path: impl AsRef<Path>) -> Result<Vec<AugmentJob>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if header.iter().ne(JOBS_HEADER) {
        return Err(Error::parse(
            path,
            1,
            format!("expected header {}", JOBS_HEADER.join(",")),
        ));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::parse(path, i + 2, e.to_string())))
        .collect()
}

/// Executes jobs: each reads `input_root/source_path`, applies the policy draw
/// seeded by the job, and writes `out_dir/output_path`. The policy's own seed
/// is not used.
pub fn run_augment_jobs(
    jobs: &[AugmentJob],
    input_root: &Path,
    out_dir: &Path,
    policy: &AugmentPolicy,
) -> Result<usize> {
    policy.validate()?;
    jobs.par_iter().try_for_each(|job| {
        let img = load_image(input_root.join(&job.source_path))?;
        let params = policy.sample(&mut seed::rng(job.seed));
        let out = augment_one(&img, &params)?;
        crate::dataset::write_file(&out_dir.join(&job.output_path), &encode_png(&out)?)
    })?;
    info!("wrote {} augmented images", jobs.len());
    Ok(jobs.len())
}
