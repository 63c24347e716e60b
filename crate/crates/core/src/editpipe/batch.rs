use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codes::CodeRecord;
use super::composite::{paste_back, CompositeParams};
use super::degrade::{degrade, DegradeRecipe};
use crate::dataset::{ImageRecord, Manifest, Split};
use crate::error::{Error, Result};
use crate::imageops::{encode_png, load_image, FaceBox};

pub const BOXES_HEADER: [&str; 5] = ["image_id", "x", "y", "w", "h"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct BoxRow {
    image_id: String,
    x: usize,
    y: usize,
    w: usize,
    h: usize,
}

/// Face boxes keyed by image id.
pub type FaceBoxes = BTreeMap<String, FaceBox>;

pub fn load_boxes(path: impl AsRef<Path>) -> Result<FaceBoxes> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if header.iter().ne(BOXES_HEADER) {
        return Err(Error::parse(
            path,
            1,
            format!("expected header {}", BOXES_HEADER.join(",")),
        ));
    }
    let mut out = FaceBoxes::new();
    for (i, row) in r.deserialize::<BoxRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if row.w == 0 || row.h == 0 {
            return Err(Error::parse(path, line, "empty box"));
        }
        let b = FaceBox::new(row.x, row.y, row.w, row.h);
        if out.insert(row.image_id.clone(), b).is_some() {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate box for `{}`", row.image_id),
            ));
        }
    }
    Ok(out)
}

pub fn write_boxes(boxes: &FaceBoxes, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BOXES_HEADER)
        .map_err(|e| Error::invalid(e.to_string()))?;
    for (id, b) in boxes {
        w.write_record([
            id.clone(),
            b.x.to_string(),
            b.y.to_string(),
            b.w.to_string(),
            b.h.to_string(),
        ])
        .map_err(|e| Error::invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    crate::dataset::write_file(path.as_ref(), &bytes)
}

/// Everything a batch run needs besides its inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EditSettings {
    pub composite: CompositeParams,
    pub degrade: DegradeRecipe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skip {
    pub image_id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub manifest: Manifest,
    pub skipped: Vec<Skip>,
}

/// Where an edited crop for `code` is expected.
pub fn crop_path(crops_dir: &Path, code: &CodeRecord) -> PathBuf {
    crops_dir.join(format!("{}.png", code.output_id()))
}

enum Step {
    Done(ImageRecord),
    Skipped(Skip),
}

fn process(
    code: &CodeRecord,
    originals: &Manifest,
    originals_root: &Path,
    boxes: &FaceBoxes,
    crops_dir: &Path,
    out_dir: &Path,
    settings: &EditSettings,
) -> Result<Step> {
    let skip = |reason: String| {
        Ok(Step::Skipped(Skip {
            image_id: code.output_id(),
            reason,
        }))
    };
    let Some(record) = originals.get(&code.image_id) else {
        return skip("no such original in the manifest".into());
    };
    let Some(face_box) = boxes.get(&code.image_id) else {
        return skip("no face box".into());
    };
    let crop_file = crop_path(crops_dir, code);
    if !crop_file.is_file() {
        return skip(format!("missing edited crop {}", crop_file.display()));
    }
    let original = load_image(originals_root.join(&record.path))?;
    let crop = load_image(&crop_file)?;
    let composite = paste_back(&original, &crop, face_box, &settings.composite)?;
    let degraded = degrade(&composite, face_box, &settings.degrade, code.seed)?;
    let rel = format!("images/{}.png", code.output_id());
    crate::dataset::write_file(&out_dir.join(&rel), &encode_png(&degraded)?)?;
    Ok(Step::Done(ImageRecord::new(
        code.output_id(),
        rel,
        code.policy.source_tag(),
        code.target,
        Split::Train,
    )))
}

/// Composites and degrades one edited crop per code, writing
/// `out_dir/images/<id>__<target>.png`. Codes whose original, box or crop
/// is missing are skipped and logged; any other failure aborts the run.
/// The output manifest follows the order of `codes`.
pub fn run_edit_batch(
    originals: &Manifest,
    originals_root: &Path,
    codes: &[CodeRecord],
    boxes: &FaceBoxes,
    crops_dir: &Path,
    out_dir: &Path,
    settings: &EditSettings,
) -> Result<BatchOutcome> {
    settings.degrade.validate()?;
    let steps: Vec<Step> = codes
        .par_iter()
        .map(|code| {
            process(
                code,
                originals,
                originals_root,
                boxes,
                crops_dir,
                out_dir,
                settings,
            )
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for step in steps {
        match step {
            Step::Done(r) => records.push(r),
            Step::Skipped(s) => {
                warn!("skipping {}: {}", s.image_id, s.reason);
                skipped.push(s);
            }
        }
    }
    info!(
        "edit batch: {} composites, {} skipped",
        records.len(),
        skipped.len()
    );
    Ok(BatchOutcome {
        manifest: Manifest::new(records)?,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxes_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("boxes.csv");
        let mut boxes = FaceBoxes::new();
        boxes.insert("b".into(), FaceBox::new(1, 2, 3, 4));
        boxes.insert("a".into(), FaceBox::new(5, 6, 7, 8));
        write_boxes(&boxes, &p).unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap(),
            "image_id,x,y,w,h\na,5,6,7,8\nb,1,2,3,4\n"
        );
        assert_eq!(load_boxes(&p).unwrap(), boxes);

        std::fs::write(&p, "image_id,x,y,w,h\na,1,1,4,4\na,2,2,4,4\n").unwrap();
        assert!(load_boxes(&p).unwrap_err().to_string().contains(":3:"));
        std::fs::write(&p, "image_id,x,y,h,w\n").unwrap();
        assert!(load_boxes(&p).is_err());
    }
}
