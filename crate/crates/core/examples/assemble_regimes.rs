//! Builds a training set under every mixing regime from synthetic pools sized
//! like the real datasets, and prints the planned/achieved count report.
//!
//! cargo run --release --example assemble_regimes

use ferforge::assembler::{assemble, AssemblyInputs, AssemblyPlan, Regime};
use ferforge::dataset::{ClassCounts, ClassLabel, ImageRecord, Manifest, Split};

fn pool(source: &str, counts: ClassCounts, confidence: bool) -> Manifest {
    let mut records = Vec::new();
    for c in ClassLabel::ALL {
        for k in 0..counts[c.index()] {
            let id = format!("{source}_{c}_{k:05}");
            let mut r =
                ImageRecord::new(&id, format!("{source}/{id}.png"), source, c, Split::Train);
            if confidence {
                r = r.with_confidence(0.3 + 0.7 * ((k * 7919) % 1000) as f64 / 999.0);
            }
            records.push(r);
        }
    }
    Manifest::new(records).expect("ids are unique")
}

fn main() -> ferforge::Result<()> {
    // Canonical order: anger, disgust, fear, happiness, neutral, sadness, surprise.
    let real = pool("rafdb", [705, 717, 281, 4772, 2524, 1982, 1290], false);
    let dcface = pool(
        "dcface",
        [10000, 9572, 2039, 10000, 10000, 10000, 10000],
        true,
    );
    let fineface = pool(
        "fineface",
        [4627, 4013, 4839, 4342, 4499, 5038, 5189],
        false,
    );
    let digiface = pool("digiface", [10000; 7], false);

    let cases: Vec<(Regime, Option<Manifest>, Vec<Manifest>)> = vec![
        (Regime::FullSynthetic, None, vec![dcface.clone()]),
        (Regime::Concat, Some(real.clone()), vec![dcface.clone()]),
        (Regime::Fix, Some(real.clone()), vec![dcface.clone()]),
        (Regime::Addon, Some(real.clone()), vec![]),
        (Regime::Allaug, Some(real.clone()), vec![]),
        (Regime::Mixed, None, vec![dcface, fineface, digiface]),
    ];
    for (regime, real, synthetic) in cases {
        let mut plan = AssemblyPlan::new(regime);
        plan.seed = 2025;
        let out = assemble(&plan, &AssemblyInputs { real, synthetic })?;
        println!(
            "== {regime}: {} records, {} augmentation jobs",
            out.manifest.len(),
            out.jobs.len()
        );
        print!("{}", out.report.to_text());
        println!();
    }
    Ok(())
}
