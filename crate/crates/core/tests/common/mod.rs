//! Fixtures shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ferforge::dataset::{write_manifest, ClassCounts, ClassLabel, ImageRecord, Manifest, Split};
use ferforge::editpipe::{
    assign_codes, write_boxes, write_codes, AngleTable, FaceBoxes, SamplingPolicy,
};
use ferforge::imageops::{save_png, FaceBox, Image};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Counts from the published per-expression table, converted from its
/// column order (Angry, Disgust, Fear, Happy, Sad, Surprise, Neutral) to
/// canonical class order.
pub fn from_table_order(row: [u64; 7]) -> ClassCounts {
    let [anger, disgust, fear, happy, sad, surprise, neutral] = row;
    [anger, disgust, fear, happy, neutral, sad, surprise]
}

pub const RAFDB_ROW: [u64; 7] = [705, 717, 281, 4772, 1982, 1290, 2524];

/// Synthetic sources and their availabilities, table column order.
pub const SYNTHETIC_ROWS: [(&str, [u64; 7]); 8] = [
    ("dcface", [10000, 9572, 2039, 10000, 10000, 10000, 10000]),
    ("digiface", [10000; 7]),
    (
        "emonet_face",
        [10000, 2201, 10000, 10000, 10000, 10000, 10000],
    ),
    (
        "stable_diffusion",
        [6307, 5913, 6015, 7280, 6249, 7008, 6716],
    ),
    ("fineface", [4627, 4013, 4839, 4342, 5038, 5189, 4499]),
    ("fineface_v2", [5437, 4754, 5926, 4939, 5729, 6181, 5315]),
    ("ganmut_f", [9958, 9935, 9952, 9951, 9953, 9967, 9950]),
    ("ganmut_v", [9958, 9937, 9954, 9952, 9958, 9966, 9950]),
];

/// A manifest with `counts[c]` records of class `c`, all tagged `source`.
/// Confidences are spread deterministically over `[0.3, 1.0]` when asked for.
pub fn pool(source: &str, counts: ClassCounts, confidence: bool) -> Manifest {
    let mut records = Vec::with_capacity(counts.iter().sum::<u64>() as usize);
    for c in ClassLabel::ALL {
        for k in 0..counts[c.index()] {
            let id = format!("{source}-{c}-{k:05}");
            let mut r =
                ImageRecord::new(&id, format!("{source}/{id}.png"), source, c, Split::Train);
            if confidence {
                r = r.with_confidence(0.3 + 0.7 * ((k * 7919) % 1000) as f64 / 999.0);
            }
            records.push(r);
        }
    }
    Manifest::new(records).unwrap()
}

pub fn rafdb() -> Manifest {
    pool("rafdb", from_table_order(RAFDB_ROW), false)
}

pub fn synthetic(name: &str) -> Manifest {
    let (_, row) = SYNTHETIC_ROWS
        .iter()
        .find(|(n, _)| *n == name)
        .expect("known source");
    pool(name, from_table_order(*row), name == "dcface")
}

/// Procedural 96x96 original: smooth gradient background with a lighter
/// oval "face" region.
pub fn original_image(k: usize) -> Image {
    let k = k as f32;
    Image::from_fn(96, 96, |x, y| {
        let (fx, fy) = (x as f32 / 95.0, y as f32 / 95.0);
        let dx = (x as f32 - 48.0) / 22.0;
        let dy = (y as f32 - 48.0) / 26.0;
        let face = if dx * dx + dy * dy < 1.0 { 0.25 } else { 0.0 };
        [
            (0.2 + 0.5 * fx + 0.05 * k + face).min(1.0),
            (0.3 + 0.3 * fy + face * 0.8).min(1.0),
            (0.6 - 0.3 * fx * fy + 0.03 * k).min(1.0),
        ]
    })
}

pub const FACE_BOX: FaceBox = FaceBox {
    x: 28,
    y: 26,
    w: 40,
    h: 44,
};

/// Procedural stand-in for an edited face crop, with a color cast the
/// transfer has to remove.
pub fn edited_crop(k: usize) -> Image {
    Image::from_fn(FACE_BOX.w, FACE_BOX.h, |x, y| {
        let stripe = ((x + 2 * y + 3 * k) % 9) as f32 / 8.0;
        [
            0.9 - 0.3 * stripe,
            0.4 + 0.2 * stripe,
            0.2 + 0.1 * (y as f32 / 43.0),
        ]
    })
}

pub struct EditFixture {
    pub dir: tempfile::TempDir,
    pub manifest: PathBuf,
    pub codes: PathBuf,
    pub boxes: PathBuf,
    pub crops: PathBuf,
}

pub const EDIT_SEED: u64 = 2024;
pub const EDIT_TARGET: ClassLabel = ClassLabel::Happiness;

/// `n` originals with boxes, fixed-policy codes towards `EDIT_TARGET`, and
/// one edited crop per code. Ids whose index is in `drop_boxes` get no box.
pub fn edit_fixture(n: usize, drop_boxes: &[usize]) -> EditFixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let mut records = Vec::new();
    let mut boxes = FaceBoxes::new();
    for k in 0..n {
        let id = format!("orig{k:02}");
        save_png(&original_image(k), root.join(format!("originals/{id}.png"))).unwrap();
        records.push(ImageRecord::new(
            &id,
            format!("originals/{id}.png"),
            "ffhq",
            ClassLabel::Neutral,
            Split::Train,
        ));
        if !drop_boxes.contains(&k) {
            boxes.insert(id, FACE_BOX);
        }
    }
    let manifest = Manifest::new(records).unwrap();
    let ids: Vec<String> = manifest.iter().map(|r| r.image_id.clone()).collect();
    let codes = assign_codes(
        &ids,
        &[EDIT_TARGET],
        SamplingPolicy::Fixed,
        &AngleTable::default(),
        EDIT_SEED,
    )
    .unwrap();
    for (k, code) in codes.iter().enumerate() {
        save_png(
            &edited_crop(k),
            root.join(format!("crops/{}.png", code.output_id())),
        )
        .unwrap();
    }
    let fx = EditFixture {
        manifest: root.join("originals.jsonl"),
        codes: root.join("codes.csv"),
        boxes: root.join("boxes.csv"),
        crops: root.join("crops"),
        dir,
    };
    write_manifest(&manifest, &fx.manifest).unwrap();
    write_codes(&codes, &fx.codes).unwrap();
    write_boxes(&boxes, &fx.boxes).unwrap();
    fx
}

/// Byte-compares `actual` against the frozen golden file `name`; with
/// `FERFORGE_BLESS=1` the golden file is (re)written instead.
pub fn check_golden(name: &str, actual: &[u8]) -> Result<(), String> {
    let path = fixtures_dir().join("golden").join(name);
    if std::env::var_os("FERFORGE_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let want = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want == actual {
        Ok(())
    } else {
        Err(format!(
            "{name} differs from its golden file ({} vs {} bytes)",
            actual.len(),
            want.len()
        ))
    }
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// `n` posteriors drawn from a skewed distribution so that a realistic share
/// falls under a 0.3 threshold.
pub fn random_posteriors(n: usize, seed: u64) -> Vec<ferforge::Posterior> {
    use rand::Rng;
    let mut rng = ferforge::seed::rng(seed);
    (0..n)
        .map(|i| {
            let sharp = 1.0 + 6.0 * rng.random::<f64>();
            let raw: [f64; 7] = std::array::from_fn(|_| rng.random::<f64>().powf(sharp));
            let total: f64 = raw.iter().sum();
            let mut probs = raw.map(|v| v / total);
            // Renormalize once more so rounding stays well inside tolerance.
            let s: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= s);
            ferforge::Posterior::new(format!("img{i:05}"), probs).unwrap()
        })
        .collect()
}

/// Inputs for running every subcommand once.
pub struct CliInputs {
    pub dir: tempfile::TempDir,
    pub edit: EditFixture,
}

impl CliInputs {
    pub fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }
}

pub fn cli_inputs() -> CliInputs {
    use ferforge::assembler::{emit_augment_jobs, write_jobs, Regime};
    use ferforge::dataset::{write_embeddings, write_posteriors, EmbeddingSet};
    use ferforge::imageops::standard_normals;
    use ferforge::metrics::{
        write_attributes, write_predictions, AgeBucket, AttributeRecord, Attributes, Gender,
        Prediction, PredictionSet, Race,
    };

    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_posteriors(&random_posteriors(400, 11), root.join("posteriors.csv")).unwrap();

    // Small real set with pixels, for assembly, augmentation and tallies.
    let counts = [3, 2, 1, 4, 3, 2, 2];
    let real = pool("real", counts, false);
    for (k, r) in real.iter().enumerate() {
        let img = Image::from_fn(24, 20, |x, y| {
            [((x + k) % 24) as f32 / 23.0, y as f32 / 19.0, 0.5]
        });
        save_png(&img, root.join(&r.path)).unwrap();
    }
    write_manifest(&real, root.join("real.jsonl")).unwrap();
    write_manifest(&pool("syn", [5; 7], true), root.join("syn.jsonl")).unwrap();
    std::fs::write(
        root.join("plan.toml"),
        "regime = \"fix\"\nreal = \"real.jsonl\"\nsynthetic = [\"syn.jsonl\"]\nper_class_cap = 6\nseed = 5\n",
    )
    .unwrap();
    write_jobs(
        &emit_augment_jobs(&real, Regime::Addon, 0, 9).unwrap(),
        root.join("jobs.csv"),
    )
    .unwrap();

    let mut attrs = Attributes::new();
    for (k, r) in real.iter().enumerate() {
        attrs.insert(
            r.image_id.clone(),
            AttributeRecord {
                image_id: r.image_id.clone(),
                gender: Gender::ALL[k % 2],
                race: Race::ALL[k % 5],
                age_bucket: AgeBucket::ALL[k % 8],
            },
        );
    }
    write_attributes(&attrs, root.join("attributes.csv")).unwrap();

    let preds: Vec<Prediction> = (0..210)
        .map(|i| Prediction {
            image_id: format!("p{i:03}"),
            truth: ClassLabel::ALL[i % 7],
            pred: ClassLabel::ALL[(i * 5 / 3) % 7],
        })
        .collect();
    write_predictions(
        &PredictionSet::new(preds).unwrap(),
        root.join("predictions.csv"),
    )
    .unwrap();

    for (name, seed, shift) in [("a.emb", 1, 0.0), ("b.emb", 2, 0.4)] {
        let (n, d) = (160, 8);
        let v = standard_normals(seed, n * d)
            .into_iter()
            .map(|z| (z + shift) as f32)
            .collect();
        let set = EmbeddingSet::new(d, v, (0..n).map(|i| format!("{name}-{i}")).collect()).unwrap();
        write_embeddings(&set, root.join(name)).unwrap();
    }

    CliInputs {
        dir,
        edit: edit_fixture(3, &[]),
    }
}

/// Argument vectors (without `--out`) exercising every subcommand.
pub fn subcommand_argvs(inp: &CliInputs) -> Vec<(&'static str, Vec<String>)> {
    let e = &inp.edit;
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let d = |p: &Path| p.display().to_string();
    vec![
        (
            "prompts gen",
            s(&["prompts", "gen", "--seed", "4", "--variant", "fineface_v1"]),
        ),
        (
            "pseudo label",
            s(&[
                "pseudo",
                "label",
                "--posteriors",
                &inp.path("posteriors.csv"),
                "--cap",
                "20",
            ]),
        ),
        (
            "edit sample-codes",
            s(&[
                "edit",
                "sample-codes",
                "--manifest",
                &d(&e.manifest),
                "--policy",
                "variate",
                "--seed",
                "8",
            ]),
        ),
        (
            "edit composite",
            s(&[
                "edit",
                "composite",
                "--manifest",
                &d(&e.manifest),
                "--codes",
                &d(&e.codes),
                "--boxes",
                &d(&e.boxes),
                "--crops",
                &d(&e.crops),
            ]),
        ),
        (
            "edit degrade",
            s(&[
                "edit",
                "degrade",
                "--manifest",
                &d(&e.manifest),
                "--boxes",
                &d(&e.boxes),
                "--seed",
                "3",
            ]),
        ),
        (
            "assemble",
            s(&["assemble", "--plan", &inp.path("plan.toml")]),
        ),
        (
            "augment run",
            s(&[
                "augment",
                "run",
                "--jobs",
                &inp.path("jobs.csv"),
                "--input-root",
                &inp.path(""),
            ]),
        ),
        (
            "metrics eval",
            s(&[
                "metrics",
                "eval",
                "--predictions",
                &inp.path("predictions.csv"),
            ]),
        ),
        (
            "metrics fid",
            s(&[
                "metrics",
                "fid",
                "--a",
                &inp.path("a.emb"),
                "--b",
                &inp.path("b.emb"),
            ]),
        ),
        (
            "metrics kid",
            s(&[
                "metrics",
                "kid",
                "--a",
                &inp.path("a.emb"),
                "--b",
                &inp.path("b.emb"),
                "--subset-size",
                "50",
                "--subsets",
                "10",
            ]),
        ),
        (
            "report counts",
            s(&["report", "counts", "--manifest", &inp.path("real.jsonl")]),
        ),
        (
            "report demographics",
            s(&[
                "report",
                "demographics",
                "--manifest",
                &inp.path("real.jsonl"),
                "--attributes",
                &inp.path("attributes.csv"),
            ]),
        ),
    ]
}

/// Runs the CLI in-process with `--out out`; returns the exit code.
pub fn run_cli(args: &[String], out: &Path) -> i32 {
    let mut argv = vec!["ferforge".to_string()];
    argv.extend(args.iter().cloned());
    argv.push("--out".into());
    argv.push(out.display().to_string());
    ferforge::cli::main_with_args(argv)
}
