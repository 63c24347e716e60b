//! End-to-end expression editing from polar codes: assign codes, composite
//! edited crops back into their originals, degrade, and collect the output
//! manifest. The "edited crops" here are tinted copies of the original face.
//!
//! cargo run --example edit_batch [-- out_dir]

use std::path::PathBuf;

use ferforge::dataset::{ClassLabel, ImageRecord, Manifest, Split};
use ferforge::editpipe::{
    assign_codes, crop_path, run_edit_batch, AngleTable, EditSettings, FaceBoxes, SamplingPolicy,
};
use ferforge::imageops::{save_png, FaceBox, Image};

fn main() -> ferforge::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ferforge-edit"));
    let face = FaceBox::new(36, 30, 56, 64);

    let mut records = Vec::new();
    let mut boxes = FaceBoxes::new();
    for k in 0..4 {
        let id = format!("ffhq_{k:05}");
        let img = Image::from_fn(128, 128, |x, y| {
            [(x + 9 * k) as f32 / 160.0, y as f32 / 127.0, 0.45]
        });
        save_png(&img, root.join(format!("originals/{id}.png")))?;
        records.push(ImageRecord::new(
            &id,
            format!("originals/{id}.png"),
            "ffhq",
            ClassLabel::Neutral,
            Split::Train,
        ));
        boxes.insert(id, face);
    }
    let originals = Manifest::new(records)?;
    let ids: Vec<String> = originals.iter().map(|r| r.image_id.clone()).collect();

    let table = AngleTable::default();
    let targets = [ClassLabel::Happiness, ClassLabel::Surprise];
    let codes = assign_codes(&ids, &targets, SamplingPolicy::Variate, &table, 11)?;
    let crops = root.join("crops");
    for code in &codes {
        // Stand-in for the external editor: a warm tint over the face region.
        let tint = Image::from_fn(face.w, face.h, |x, y| {
            [
                0.9,
                0.5 + 0.3 * x as f32 / face.w as f32,
                0.3 + 0.2 * y as f32 / face.h as f32,
            ]
        });
        save_png(&tint, crop_path(&crops, code))?;
        println!(
            "{} -> {} (rho {:.3}, theta {:.3})",
            code.image_id, code.target, code.rho, code.theta
        );
    }

    let out = root.join("edited");
    let outcome = run_edit_batch(
        &originals,
        &root,
        &codes,
        &boxes,
        &crops,
        &out,
        &EditSettings::default(),
    )?;
    println!(
        "{} edited images, {} skipped",
        outcome.manifest.len(),
        outcome.skipped.len()
    );
    print!("{}", outcome.manifest.to_jsonl());
    Ok(())
}
