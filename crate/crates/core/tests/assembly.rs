//! Count laws of every regime against a brute-force recount, plus the
//! published per-expression rows.

mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use common::*;
use ferforge::assembler::{
    assemble, emit_augment_jobs, report_counts, table_row, AssemblyInputs, AssemblyPlan, Regime,
};
use ferforge::dataset::{ClassLabel, Manifest, Split};

fn plan(regime: Regime, cap: u64, seed: u64) -> AssemblyPlan {
    let mut p = AssemblyPlan::new(regime);
    p.per_class_cap = cap;
    p.seed = seed;
    p
}

fn recount(m: &Manifest, source: &str, split: Split) -> [u64; 7] {
    let mut out = [0; 7];
    for r in m.iter().filter(|r| r.source == source && r.split == split) {
        out[r.label.index()] += 1;
    }
    out
}

fn counts_strategy(max: u64) -> impl Strategy<Value = [u64; 7]> {
    prop::array::uniform7(0..max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn fix_and_concat_laws(real in counts_strategy(40), avail in counts_strategy(40), cap in 1u64..60, seed: u64) {
        let inputs = AssemblyInputs { real: Some(pool("real", real, false)), synthetic: vec![pool("syn", avail, seed % 2 == 0)] };
        let fix = assemble(&plan(Regime::Fix, cap, seed), &inputs).unwrap().manifest;
        let concat = assemble(&plan(Regime::Concat, cap, seed), &inputs).unwrap().manifest;
        for c in 0..7 {
            prop_assert_eq!(recount(&fix, "real", Split::Train)[c], real[c]);
            prop_assert_eq!(recount(&fix, "syn", Split::Train)[c], cap.saturating_sub(real[c]).min(avail[c]));
            prop_assert_eq!(recount(&concat, "syn", Split::Train)[c], avail[c]);
            prop_assert_eq!(recount(&concat, "real", Split::Train)[c], real[c]);
        }
    }

    #[test]
    fn full_synthetic_law(avail in counts_strategy(50), cap in 1u64..40, seed: u64) {
        let inputs = AssemblyInputs { real: None, synthetic: vec![pool("syn", avail, true)] };
        let out = assemble(&plan(Regime::FullSynthetic, cap, seed), &inputs).unwrap();
        let got = recount(&out.manifest, "syn", Split::Train);
        for c in 0..7 {
            prop_assert_eq!(got[c], avail[c].min(cap));
        }
        // Confidence present: the kept records are the most confident ones.
        let source = pool("syn", avail, true);
        for class in ClassLabel::ALL {
            let mut ranked: Vec<_> = source.iter().filter(|r| r.label == class).collect();
            ranked.sort_by(|a, b| b.confidence.partial_cmp(&a.confidence).unwrap().then(a.image_id.cmp(&b.image_id)));
            let want: HashSet<&str> = ranked.iter().take(cap as usize).map(|r| r.image_id.as_str()).collect();
            let kept: HashSet<&str> = out.manifest.iter().filter(|r| r.label == class).map(|r| r.image_id.as_str()).collect();
            prop_assert_eq!(kept, want);
        }
        prop_assert_eq!(out.report.rows[0].has_shortfall(), avail.iter().any(|&a| a < cap));
    }

    #[test]
    fn mixed_law(a in counts_strategy(30), b in counts_strategy(30), per_source in 1u64..20, seed: u64) {
        let mut p = plan(Regime::Mixed, 10_000, seed);
        p.mixed_per_source = per_source;
        let inputs = AssemblyInputs { real: None, synthetic: vec![pool("a", a, false), pool("b", b, false)] };
        let m = assemble(&p, &inputs).unwrap().manifest;
        let want_val = (per_source as f64 * 0.1).round() as u64;
        for (name, avail) in [("a", a), ("b", b)] {
            let train = recount(&m, name, Split::Train);
            let val = recount(&m, name, Split::Val);
            for c in 0..7 {
                prop_assert_eq!(train[c], avail[c].min(per_source));
                prop_assert_eq!(val[c], (avail[c] - train[c]).min(want_val));
            }
        }
        let ids: HashSet<&str> = m.iter().map(|r| r.image_id.as_str()).collect();
        prop_assert_eq!(ids.len(), m.len());
    }

    #[test]
    fn augmentation_laws(real in prop::array::uniform7(1u64..30), seed: u64) {
        let m = pool("real", real, false);
        let majority = *real.iter().max().unwrap();
        let addon = emit_augment_jobs(&m, Regime::Addon, 0, seed).unwrap();
        let allaug = emit_augment_jobs(&m, Regime::Allaug, 50, seed).unwrap();
        for c in ClassLabel::ALL {
            let n = |jobs: &[ferforge::assembler::AugmentJob]| jobs.iter().filter(|j| j.label == c).count() as u64;
            prop_assert_eq!(n(&addon), majority - real[c.index()]);
            prop_assert_eq!(n(&allaug), 50 - real[c.index()]);
            // Round-robin: repeats of any one source differ by at most one.
            let mut per_src = std::collections::BTreeMap::<&str, u64>::new();
            for j in allaug.iter().filter(|j| j.label == c) {
                *per_src.entry(j.source_id.as_str()).or_default() += 1;
            }
            if let (Some(lo), Some(hi)) = (per_src.values().min(), per_src.values().max()) {
                prop_assert!(hi - lo <= 1);
            }
        }
    }
}

#[test]
fn rafdb_fixture_renders_the_published_row() {
    let table = report_counts(&rafdb());
    assert_eq!(table_row(&table.get("rafdb")), RAFDB_ROW);
    let text = table.to_text();
    let row = text.lines().find(|l| l.starts_with("rafdb")).unwrap();
    let cells: Vec<&str> = row.split_whitespace().skip(1).collect();
    assert_eq!(cells, ["705", "717", "281", "4772", "1982", "1290", "2524"]);
    assert!(text.lines().next().unwrap().split_whitespace().eq([
        "Dataset", "Angry", "Disgust", "Fear", "Happy", "Sad", "Surprise", "Neutral"
    ]
    .into_iter()));
}

#[test]
fn empty_manifest_reports_zeros() {
    let table = report_counts(&Manifest::new(vec![]).unwrap());
    assert_eq!(table.total(), [0; 7]);
    assert!(table
        .to_text()
        .lines()
        .nth(1)
        .unwrap()
        .split_whitespace()
        .skip(1)
        .all(|c| c == "0"));
}

#[test]
fn concat_report_is_the_sum_of_its_inputs() {
    let (real, syn) = (rafdb(), synthetic("stable_diffusion"));
    let inputs = AssemblyInputs {
        real: Some(real.clone()),
        synthetic: vec![syn.clone()],
    };
    let out = assemble(&plan(Regime::Concat, 10_000, 3), &inputs).unwrap();
    let (a, b, sum) = (
        real.class_counts(),
        syn.class_counts(),
        report_counts(&out.manifest).total(),
    );
    for c in 0..7 {
        assert_eq!(sum[c], a[c] + b[c]);
    }
}

#[test]
fn fix_over_cap_keeps_real_and_notes_it() {
    let real = pool("real", [12, 3, 3, 3, 3, 3, 3], false);
    let inputs = AssemblyInputs {
        real: Some(real),
        synthetic: vec![pool("syn", [20; 7], false)],
    };
    let out = assemble(&plan(Regime::Fix, 10, 0), &inputs).unwrap();
    assert_eq!(recount(&out.manifest, "real", Split::Train)[0], 12);
    assert_eq!(
        recount(&out.manifest, "syn", Split::Train),
        [0, 7, 7, 7, 7, 7, 7]
    );
    assert_eq!(out.report.notes.len(), 1);
}

#[test]
fn allaug_below_real_count_is_an_error() {
    let real = pool("real", [12, 3, 3, 3, 3, 3, 3], false);
    assert!(emit_augment_jobs(&real, Regime::Allaug, 10, 0).is_err());
}

#[test]
fn balanced_addon_emits_nothing() {
    assert!(
        emit_augment_jobs(&pool("real", [4; 7], false), Regime::Addon, 0, 0)
            .unwrap()
            .is_empty()
    );
}

#[test]
fn mixed_shortfall_is_flagged() {
    let mut p = plan(Regime::Mixed, 10_000, 1);
    p.mixed_per_source = 10;
    let inputs = AssemblyInputs {
        real: None,
        synthetic: vec![
            pool("a", [20; 7], false),
            pool("b", [20, 20, 4, 20, 20, 20, 20], false),
        ],
    };
    let out = assemble(&p, &inputs).unwrap();
    let b = out.report.row("b", Split::Train).unwrap();
    assert!(b.shortfall(ClassLabel::Fear) && !b.shortfall(ClassLabel::Anger));
    assert!(!out.report.row("a", Split::Train).unwrap().has_shortfall());
    assert!(out.report.to_text().contains('*'));
}

#[test]
fn assembly_is_deterministic_and_seed_sensitive() {
    let inputs = AssemblyInputs {
        real: None,
        synthetic: vec![synthetic("fineface"), synthetic("ganmut_f")],
    };
    let a = assemble(&plan(Regime::Mixed, 10_000, 4), &inputs)
        .unwrap()
        .manifest
        .to_jsonl();
    let b = assemble(&plan(Regime::Mixed, 10_000, 4), &inputs)
        .unwrap()
        .manifest
        .to_jsonl();
    let c = assemble(&plan(Regime::Mixed, 10_000, 5), &inputs)
        .unwrap()
        .manifest
        .to_jsonl();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn output_is_ordered_by_class_source_id() {
    let inputs = AssemblyInputs {
        real: Some(pool("real", [3; 7], false)),
        synthetic: vec![pool("syn", [3; 7], false)],
    };
    let m = assemble(&plan(Regime::Concat, 10, 0), &inputs)
        .unwrap()
        .manifest;
    let keys: Vec<_> = m
        .iter()
        .map(|r| (r.label.index(), r.source.clone(), r.image_id.clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn addon_manifest_holds_originals_and_augmented() {
    let real = rafdb();
    let out = assemble(
        &plan(Regime::Addon, 10_000, 2),
        &AssemblyInputs {
            real: Some(real.clone()),
            synthetic: vec![],
        },
    )
    .unwrap();
    let totals = report_counts(&out.manifest).total();
    assert_eq!(totals, [4772; 7]);
    assert_eq!(
        recount(&out.manifest, "rafdb", Split::Train),
        real.class_counts()
    );
}
