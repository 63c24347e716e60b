//! Scores a prediction set, compares two embedding sets with FID and KID, and
//! renders a demographic tally.
//!
//! cargo run --release --example evaluate

use rand::Rng;

use ferforge::dataset::{ClassLabel, EmbeddingSet, ImageRecord, Manifest, Split};
use ferforge::imageops::standard_normals;
use ferforge::metrics::{
    evaluate, fid, kid, render_demographics, tally_attributes, AgeBucket, AttributeRecord,
    Attributes, Gender, KidParams, Prediction, PredictionSet, Race,
};

fn cloud(n: usize, d: usize, seed: u64, shift: f64) -> EmbeddingSet {
    let v = standard_normals(seed, n * d)
        .into_iter()
        .map(|z| (z + shift) as f32)
        .collect();
    EmbeddingSet::new(d, v, (0..n).map(|i| format!("e{seed}_{i}")).collect()).expect("valid set")
}

fn main() -> ferforge::Result<()> {
    // A classifier that is right 60% of the time and otherwise guesses.
    let mut rng = ferforge::seed::rng(5);
    let preds: Vec<Prediction> = (0..3500)
        .map(|i| {
            let truth = ClassLabel::ALL[i % 7];
            let pred = if rng.random::<f64>() < 0.6 {
                truth
            } else {
                ClassLabel::ALL[rng.random_range(0..7)]
            };
            Prediction {
                image_id: format!("val_{i:05}"),
                truth,
                pred,
            }
        })
        .collect();
    let report = evaluate(&PredictionSet::new(preds)?)?;
    print!("{}", report.to_text("toy classifier"));

    let (real, near, far) = (
        cloud(3000, 64, 1, 0.0),
        cloud(3000, 64, 2, 0.05),
        cloud(3000, 64, 3, 0.5),
    );
    let params = KidParams::default();
    for (name, other) in [("near", &near), ("far", &far)] {
        let k = kid(&real, other, &params, 0)?;
        println!(
            "{name}: FID {:.3}  KID {:.4} +/- {:.4}",
            fid(&real, other)?,
            k.mean,
            k.std
        );
    }

    let mut records = Vec::new();
    let mut attrs = Attributes::new();
    for i in 0..1000 {
        let id = format!("syn_{i:04}");
        records.push(ImageRecord::new(
            &id,
            format!("{id}.png"),
            "syn",
            ClassLabel::ALL[i % 7],
            Split::Train,
        ));
        let rec = AttributeRecord {
            image_id: id.clone(),
            gender: Gender::ALL[(i * 7 / 13) % 2],
            race: Race::ALL[(i * i) % 5],
            age_bucket: AgeBucket::ALL[(i / 3) % 8],
        };
        attrs.insert(id, rec);
    }
    let tally = tally_attributes(&Manifest::new(records)?, &attrs)?;
    print!("{}", render_demographics(&[("Synthetic".into(), tally)]));
    Ok(())
}
