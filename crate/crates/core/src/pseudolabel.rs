//! Teacher-posterior pseudo-labeling: argmax assignment, an inclusive
//! confidence threshold, then a per-class cap that keeps the most confident
//! samples.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, ImageRecord, Manifest, Posterior, Split, NUM_CLASSES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterPolicy {
    /// Minimum assigned-class probability; comparison is `>=`.
    pub threshold: f64,
    pub per_class_cap: usize,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            threshold: 0.3,
            per_class_cap: 10_000,
        }
    }
}

impl FilterPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::invalid(format!(
                "threshold {} must lie in (0, 1)",
                self.threshold
            )));
        }
        if self.per_class_cap == 0 {
            return Err(Error::invalid("per-class cap must be at least 1"));
        }
        if self.threshold <= 1.0 / NUM_CLASSES as f64 {
            log::warn!(
                "threshold {} does not exceed chance level 1/7; every sample passes",
                self.threshold
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabel {
    pub image_id: String,
    pub label: ClassLabel,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<PseudoLabel>,
    pub discarded: usize,
}

/// Argmax over the canonical class order. Equal maxima resolve to the lowest
/// class index.
pub fn assign(posterior: &Posterior) -> (ClassLabel, f64) {
    let mut best = 0;
    for (i, &p) in posterior.probs.iter().enumerate().skip(1) {
        if p > posterior.probs[best] {
            best = i;
        }
    }
    (ClassLabel::ALL[best], posterior.probs[best])
}

/// Keeps every posterior whose assigned-class probability is `>=` the
/// threshold, preserving input order.
pub fn filter(posteriors: &[Posterior], policy: &FilterPolicy) -> FilterOutcome {
    let kept: Vec<PseudoLabel> = posteriors
        .par_iter()
        .filter_map(|p| {
            let (label, confidence) = assign(p);
            (confidence >= policy.threshold).then(|| PseudoLabel {
                image_id: p.image_id.clone(),
                label,
                confidence,
            })
        })
        .collect();
    FilterOutcome {
        discarded: posteriors.len() - kept.len(),
        kept,
    }
}

/// How selected pseudo-labels become manifest records.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTemplate {
    pub source: String,
    /// Relative image path; `{id}` is replaced by the image id.
    pub path_template: String,
    pub split: Split,
}

impl RecordTemplate {
    pub fn new(source: impl Into<String>) -> Self {
        RecordTemplate {
            source: source.into(),
            path_template: "{id}.png".into(),
            split: Split::Train,
        }
    }

    fn record(&self, p: &PseudoLabel) -> ImageRecord {
        ImageRecord::new(
            p.image_id.clone(),
            self.path_template.replace("{id}", &p.image_id),
            self.source.clone(),
            p.label,
            self.split,
        )
        .with_confidence(p.confidence)
    }
}

/// Descending confidence, then ascending image id.
fn by_confidence(a: &PseudoLabel, b: &PseudoLabel) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then_with(|| a.image_id.cmp(&b.image_id))
}

/// Keeps the `per_class_cap` most confident samples of each class. Output is
/// ordered by (class, descending confidence, image id).
pub fn select_top(
    kept: &[PseudoLabel],
    policy: &FilterPolicy,
    template: &RecordTemplate,
) -> Result<Manifest> {
    let mut by_class: [Vec<&PseudoLabel>; NUM_CLASSES] = Default::default();
    for p in kept {
        by_class[p.label.index()].push(p);
    }
    let selected: Vec<Vec<ImageRecord>> = by_class
        .into_par_iter()
        .map(|mut group| {
            group.sort_by(|a, b| by_confidence(a, b));
            group.truncate(policy.per_class_cap);
            group.into_iter().map(|p| template.record(p)).collect()
        })
        .collect();
    Manifest::new(selected.concat())
}

/// Per-class bookkeeping for one pseudo-labeling run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelStats {
    pub total: usize,
    pub discarded: usize,
    /// Samples passing the threshold, per class.
    pub passing: [u64; NUM_CLASSES],
    pub selected: [u64; NUM_CLASSES],
}

/// `filter` followed by `select_top`.
pub fn pseudo_label(
    posteriors: &[Posterior],
    policy: &FilterPolicy,
    template: &RecordTemplate,
) -> Result<(Manifest, LabelStats)> {
    policy.validate()?;
    let outcome = filter(posteriors, policy);
    let mut passing = [0u64; NUM_CLASSES];
    for p in &outcome.kept {
        passing[p.label.index()] += 1;
    }
    let manifest = select_top(&outcome.kept, policy, template)?;
    let stats = LabelStats {
        total: posteriors.len(),
        discarded: outcome.discarded,
        passing,
        selected: manifest.class_counts(),
    };
    Ok((manifest, stats))
}
