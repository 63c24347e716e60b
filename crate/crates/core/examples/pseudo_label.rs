//! Pseudo-labels a batch of teacher posteriors and prints what survives the
//! threshold and the per-class cap.
//!
//! cargo run --example pseudo_label

use rand::Rng;

use ferforge::dataset::{ClassLabel, Posterior};
use ferforge::pseudolabel::{pseudo_label, FilterPolicy, RecordTemplate};

fn main() -> ferforge::Result<()> {
    let mut rng = ferforge::seed::rng(1);
    let posteriors: Vec<Posterior> = (0..2000)
        .map(|i| {
            let raw: [f64; 7] = std::array::from_fn(|_| rng.random::<f64>().powi(4));
            let s: f64 = raw.iter().sum();
            Posterior::new(format!("dcface_{i:05}"), raw.map(|v| v / s))
        })
        .collect::<ferforge::Result<_>>()?;

    let policy = FilterPolicy {
        threshold: 0.3,
        per_class_cap: 150,
    };
    let template = RecordTemplate {
        path_template: "dcface/{id}.png".into(),
        ..RecordTemplate::new("dcface")
    };
    let (manifest, stats) = pseudo_label(&posteriors, &policy, &template)?;

    println!(
        "{} posteriors, {} under the threshold",
        stats.total, stats.discarded
    );
    println!("{:<10} {:>8} {:>8}", "class", "passing", "kept");
    for c in ClassLabel::ALL {
        println!(
            "{:<10} {:>8} {:>8}",
            c,
            stats.passing[c.index()],
            stats.selected[c.index()]
        );
    }
    if let Some(first) = manifest.iter().next() {
        println!("first record: {}", serde_json::to_string(first).unwrap());
    }
    Ok(())
}
