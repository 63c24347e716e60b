use std::collections::BTreeMap;

use log::warn;

use super::jobs::{augment_targets, emit_augment_jobs, AugmentJob, AUGMENTED_SOURCE};
use super::plan::{AssemblyInputs, AssemblyPlan, Regime};
use super::report::{report_counts, CountReport, CountRow};
use crate::dataset::{ClassLabel, ImageRecord, Manifest, Split, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone)]
pub struct Assembly {
    pub manifest: Manifest,
    pub report: CountReport,
    /// Augmentation still to be executed; their outputs are already listed
    /// in `manifest`.
    pub jobs: Vec<AugmentJob>,
}

type Pool = [Vec<ImageRecord>; NUM_CLASSES];

/// Synthetic records grouped by source tag, then class, in image-id order.
fn synthetic_pools(manifests: &[Manifest]) -> BTreeMap<String, Pool> {
    let mut pools: BTreeMap<String, Pool> = BTreeMap::new();
    for r in manifests.iter().flat_map(Manifest::iter) {
        pools.entry(r.source.clone()).or_default()[r.label.index()].push(r.clone());
    }
    for pool in pools.values_mut() {
        for class in pool.iter_mut() {
            class.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        }
    }
    pools
}

#[derive(Clone, Copy)]
enum Rule {
    /// Highest confidence first when every record has one, else uniform.
    PreferConfidence,
    Uniform,
}

/// Splits an id-sorted pool into `k` selected records and the rest.
fn take(
    pool: &[ImageRecord],
    k: usize,
    rule: Rule,
    seed: u64,
) -> (Vec<ImageRecord>, Vec<ImageRecord>) {
    let k = k.min(pool.len());
    if k == pool.len() {
        return (pool.to_vec(), Vec::new());
    }
    let scored = pool.iter().all(|r| r.confidence.is_some());
    let chosen: Vec<usize> = match rule {
        Rule::PreferConfidence if scored => {
            let mut idx: Vec<usize> = (0..pool.len()).collect();
            idx.sort_by(|&a, &b| {
                let (ra, rb) = (&pool[a], &pool[b]);
                rb.confidence
                    .partial_cmp(&ra.confidence)
                    .unwrap()
                    .then_with(|| ra.image_id.cmp(&rb.image_id))
            });
            idx.truncate(k);
            idx
        }
        _ => rand::seq::index::sample(&mut seed::rng(seed), pool.len(), k).into_vec(),
    };
    let mut picked = vec![false; pool.len()];
    for i in chosen {
        picked[i] = true;
    }
    let (mut sel, mut rest) = (Vec::with_capacity(k), Vec::new());
    for (r, p) in pool.iter().zip(picked) {
        if p {
            sel.push(r.clone());
        } else {
            rest.push(r.clone());
        }
    }
    (sel, rest)
}

fn with_split(mut r: ImageRecord, split: Split) -> ImageRecord {
    r.split = split;
    r
}

fn check_shape(plan: &AssemblyPlan, inputs: &AssemblyInputs, sources: usize) -> Result<()> {
    let has_real = inputs.real.is_some();
    let ok = match plan.regime {
        Regime::FullSynthetic => !has_real && sources == 1,
        Regime::Concat | Regime::Fix => has_real && sources == 1,
        Regime::Addon | Regime::Allaug => has_real && sources == 0,
        Regime::Mixed => !has_real && sources >= 2,
    };
    if ok {
        return Ok(());
    }
    let need = match plan.regime {
        Regime::FullSynthetic => "exactly one synthetic source and no real manifest",
        Regime::Concat | Regime::Fix => "a real manifest and exactly one synthetic source",
        Regime::Addon | Regime::Allaug => "a real manifest and no synthetic sources",
        Regime::Mixed => "at least two synthetic sources and no real manifest",
    };
    Err(Error::invalid(format!(
        "regime {} needs {need}; got {} real and {sources} synthetic source(s)",
        plan.regime,
        if has_real { "a" } else { "no" }
    )))
}

/// Builds the manifest for `plan`. Output order is (class, source, image_id);
/// real records always pass through unchanged.
pub fn assemble(plan: &AssemblyPlan, inputs: &AssemblyInputs) -> Result<Assembly> {
    plan.validate()?;
    let pools = synthetic_pools(&inputs.synthetic);
    check_shape(plan, inputs, pools.len())?;

    let mut records: Vec<ImageRecord> = Vec::new();
    let mut report = CountReport::default();
    let mut jobs = Vec::new();

    let real_counts = inputs
        .real
        .as_ref()
        .map(Manifest::class_counts)
        .unwrap_or_default();
    if let Some(real) = &inputs.real {
        for (source, counts) in report_counts(real).rows {
            report.rows.push(CountRow {
                source,
                split: Split::Train,
                planned: counts,
                achieved: counts,
            });
        }
        records.extend(real.iter().cloned());
    }

    let cap = plan.per_class_cap;
    for (source, pool) in &pools {
        let mut train = CountRow {
            source: source.clone(),
            split: Split::Train,
            planned: [0; NUM_CLASSES],
            achieved: [0; NUM_CLASSES],
        };
        let mut val = CountRow {
            split: Split::Val,
            ..train.clone()
        };
        for class in ClassLabel::ALL {
            let c = class.index();
            let avail = &pool[c];
            let key =
                |what: &str| seed::derive(plan.seed, &format!("assemble/{what}/{source}/{class}"));
            let planned = match plan.regime {
                Regime::FullSynthetic => cap,
                Regime::Concat => avail.len() as u64,
                Regime::Fix => {
                    if real_counts[c] > cap {
                        let note = format!("{class}: {} real records exceed the cap {cap}; all kept, no synthetic added", real_counts[c]);
                        warn!("{note}");
                        report.notes.push(note);
                    }
                    cap.saturating_sub(real_counts[c])
                }
                Regime::Mixed => plan.mixed_per_source,
                Regime::Addon | Regime::Allaug => unreachable!("checked by check_shape"),
            };
            let rule = if plan.regime == Regime::Mixed {
                Rule::Uniform
            } else {
                Rule::PreferConfidence
            };
            let (sel, rest) = take(avail, planned as usize, rule, key("train"));
            train.planned[c] = planned;
            train.achieved[c] = sel.len() as u64;
            records.extend(sel.into_iter().map(|r| with_split(r, Split::Train)));

            if plan.regime == Regime::Mixed {
                let want = (plan.mixed_per_source as f64 * plan.validation_ratio).round() as u64;
                let (held, _) = take(&rest, want as usize, Rule::Uniform, key("val"));
                val.planned[c] = want;
                val.achieved[c] = held.len() as u64;
                records.extend(held.into_iter().map(|r| with_split(r, Split::Val)));
            }
        }
        for row in [&train, &val] {
            if row.has_shortfall() {
                warn!("{} ({}) falls short of its plan", row.source, row.split);
            }
        }
        report.rows.push(train);
        if plan.regime == Regime::Mixed {
            report.rows.push(val);
        }
    }

    if plan.regime.is_augmenting() {
        let real = inputs.real.as_ref().expect("checked by check_shape");
        let targets = augment_targets(real, plan.regime, cap)?;
        jobs = emit_augment_jobs(real, plan.regime, cap, plan.seed)?;
        records.extend(jobs.iter().map(AugmentJob::record));
        report.rows.push(CountRow {
            source: AUGMENTED_SOURCE.to_string(),
            split: Split::Train,
            planned: targets,
            achieved: targets,
        });
    }

    records.sort_by(|a, b| {
        (a.label.index(), &a.source, &a.image_id).cmp(&(b.label.index(), &b.source, &b.image_id))
    });
    Ok(Assembly {
        manifest: Manifest::new(records)?,
        report,
        jobs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(source: &str, counts: [usize; NUM_CLASSES], confidence: bool) -> Manifest {
        let mut records = Vec::new();
        for c in ClassLabel::ALL {
            for k in 0..counts[c.index()] {
                let mut r = ImageRecord::new(
                    format!("{source}-{c}-{k:05}"),
                    "p.png",
                    source,
                    c,
                    Split::Train,
                );
                if confidence {
                    r = r.with_confidence(((k * 37) % 101) as f64 / 100.0);
                }
                records.push(r);
            }
        }
        Manifest::new(records).unwrap()
    }

    #[test]
    fn shape_checks() {
        let real = pool("real", [1; NUM_CLASSES], false);
        let syn = pool("syn", [1; NUM_CLASSES], false);
        let plan = AssemblyPlan::new(Regime::Fix);
        let inputs = AssemblyInputs {
            real: None,
            synthetic: vec![syn.clone()],
        };
        assert!(assemble(&plan, &inputs).is_err());
        let plan = AssemblyPlan::new(Regime::Mixed);
        let inputs = AssemblyInputs {
            real: None,
            synthetic: vec![syn.clone()],
        };
        assert!(assemble(&plan, &inputs).is_err());
        let plan = AssemblyPlan::new(Regime::Addon);
        let inputs = AssemblyInputs {
            real: Some(real),
            synthetic: vec![syn],
        };
        assert!(assemble(&plan, &inputs).is_err());
    }

    #[test]
    fn full_synthetic_prefers_confidence() {
        let syn = pool("syn", [30; NUM_CLASSES], true);
        let plan = AssemblyPlan {
            per_class_cap: 10,
            ..AssemblyPlan::new(Regime::FullSynthetic)
        };
        let out = assemble(
            &plan,
            &AssemblyInputs {
                real: None,
                synthetic: vec![syn.clone()],
            },
        )
        .unwrap();
        assert_eq!(out.manifest.class_counts(), [10; NUM_CLASSES]);
        let fear: Vec<_> = out
            .manifest
            .iter()
            .filter(|r| r.label == ClassLabel::Fear)
            .collect();
        let min_sel = fear
            .iter()
            .map(|r| r.confidence.unwrap())
            .fold(1.0, f64::min);
        let max_rej = syn
            .iter()
            .filter(|r| r.label == ClassLabel::Fear && out.manifest.get(&r.image_id).is_none())
            .map(|r| r.confidence.unwrap())
            .fold(0.0, f64::max);
        assert!(min_sel >= max_rej);
    }

    #[test]
    fn uniform_sampling_is_seeded() {
        let syn = pool("syn", [30; NUM_CLASSES], false);
        let inputs = AssemblyInputs {
            real: None,
            synthetic: vec![syn],
        };
        let plan = |seed| AssemblyPlan {
            per_class_cap: 10,
            seed,
            ..AssemblyPlan::new(Regime::FullSynthetic)
        };
        let a = assemble(&plan(1), &inputs).unwrap().manifest;
        assert_eq!(a, assemble(&plan(1), &inputs).unwrap().manifest);
        assert_ne!(a, assemble(&plan(2), &inputs).unwrap().manifest);
    }

    #[test]
    fn mixed_validation_is_disjoint_and_sized() {
        let inputs = AssemblyInputs {
            real: None,
            synthetic: vec![
                pool("a", [40; NUM_CLASSES], false),
                pool("b", [25; NUM_CLASSES], false),
            ],
        };
        let plan = AssemblyPlan {
            mixed_per_source: 20,
            validation_ratio: 0.25,
            ..AssemblyPlan::new(Regime::Mixed)
        };
        let out = assemble(&plan, &inputs).unwrap();
        let train = out.report.achieved_total(Split::Train);
        let val = out.report.achieved_total(Split::Val);
        assert_eq!(train, [40; NUM_CLASSES]);
        // b has only 5 left per class after its 20 training picks
        assert_eq!(val, [10; NUM_CLASSES]);
        assert!(!out.report.row("b", Split::Val).unwrap().has_shortfall());
        let plan = AssemblyPlan {
            validation_ratio: 0.5,
            ..plan
        };
        let out = assemble(&plan, &inputs).unwrap();
        assert!(out.report.row("b", Split::Val).unwrap().has_shortfall());
        assert!(!out.report.row("a", Split::Val).unwrap().has_shortfall());
    }

    #[test]
    fn output_order() {
        let real = pool("real", [2; NUM_CLASSES], false);
        let syn = pool("dc", [2; NUM_CLASSES], false);
        let out = assemble(
            &AssemblyPlan::new(Regime::Concat),
            &AssemblyInputs {
                real: Some(real),
                synthetic: vec![syn],
            },
        )
        .unwrap();
        let keys: Vec<_> = out
            .manifest
            .iter()
            .map(|r| (r.label.index(), r.source.clone(), r.image_id.clone()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(out.manifest.iter().next().unwrap().source, "dc");
    }
}
