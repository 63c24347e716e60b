use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde_json::json;

use super::config::FileConfig;
use super::summary::RunSummary;
use super::{
    AssembleArgs, AugmentCmd, Command, EditCmd, MetricsCmd, PromptsCmd, PseudoCmd, ReportCmd,
};
use crate::assembler::{
    assemble, load_jobs, report_counts, run_augment_jobs, write_jobs, AssemblyPlan,
};
use crate::dataset::{
    load_embeddings, load_manifest, load_posteriors, write_file, write_manifest, ClassLabel,
    ImageRecord, Manifest,
};
use crate::editpipe::{
    assign_codes, degrade, load_boxes, load_codes, run_edit_batch, write_codes, DegradeRecipe,
    EditSettings,
};
use crate::error::{Error, Result};
use crate::imageops::{encode_png, load_image};
use crate::metrics::{
    demographics_csv, evaluate, fid, kid, load_attributes, load_predictions, render_demographics,
    tally_attributes, KidParams,
};
use crate::promptforge::{
    check_lexicon, enumerate_grid, planned_counts, write_prompt_csv, FactorSpace, PromptTables,
    Variant, DEFAULT_FACTOR_SPACE, DEFAULT_PROMPT_TABLES,
};
use crate::pseudolabel::{pseudo_label, RecordTemplate};
use crate::seed;

pub(super) struct Ctx {
    pub cfg: FileConfig,
    /// Seed from `--seed` or the config file, if either gave one.
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub summary: RunSummary,
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.summary.input(path)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        write_file(&self.out.join(name), bytes)
    }

    fn count_by_class(&mut self, prefix: &str, counts: &[u64; 7]) {
        for c in ClassLabel::ALL {
            self.summary
                .output(&format!("{prefix}.{c}"), counts[c.index()]);
        }
    }
}

pub(super) fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Prompts {
            cmd: PromptsCmd::Gen { .. },
        } => "prompts gen",
        Command::Pseudo {
            cmd: PseudoCmd::Label { .. },
        } => "pseudo label",
        Command::Edit {
            cmd: EditCmd::SampleCodes { .. },
        } => "edit sample-codes",
        Command::Edit {
            cmd: EditCmd::Composite { .. },
        } => "edit composite",
        Command::Edit {
            cmd: EditCmd::Degrade { .. },
        } => "edit degrade",
        Command::Assemble(_) => "assemble",
        Command::Augment {
            cmd: AugmentCmd::Run { .. },
        } => "augment run",
        Command::Metrics {
            cmd: MetricsCmd::Eval { .. },
        } => "metrics eval",
        Command::Metrics {
            cmd: MetricsCmd::Fid { .. },
        } => "metrics fid",
        Command::Metrics {
            cmd: MetricsCmd::Kid { .. },
        } => "metrics kid",
        Command::Report {
            cmd: ReportCmd::Counts { .. },
        } => "report counts",
        Command::Report {
            cmd: ReportCmd::Demographics { .. },
        } => "report demographics",
    }
}

pub(super) fn execute(cmd: &Command, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        Command::Prompts {
            cmd:
                PromptsCmd::Gen {
                    variant,
                    factor_space,
                    tables,
                    images_per_prompt,
                },
        } => prompts_gen(
            ctx,
            *variant,
            factor_space.as_deref(),
            tables.as_deref(),
            *images_per_prompt,
        ),
        Command::Pseudo {
            cmd:
                PseudoCmd::Label {
                    posteriors,
                    threshold,
                    cap,
                    source,
                    path_template,
                },
        } => pseudo(
            ctx,
            posteriors,
            *threshold,
            *cap,
            source.as_deref(),
            path_template.as_deref(),
        ),
        Command::Edit {
            cmd:
                EditCmd::SampleCodes {
                    manifest,
                    policy,
                    targets,
                },
        } => {
            ctx.input(manifest)?;
            let m = load_manifest(manifest)?;
            let ids: Vec<String> = m.iter().map(|r| r.image_id.clone()).collect();
            let targets = if targets.is_empty() {
                ClassLabel::ALL.to_vec()
            } else {
                targets.clone()
            };
            let table = ctx.cfg.angles.clone().unwrap_or_default();
            let codes = assign_codes(&ids, &targets, *policy, &table, ctx.seed())?;
            write_codes(&codes, ctx.out.join("codes.csv"))?;
            ctx.summary.output("codes", codes.len() as u64);
            Ok(())
        }
        Command::Edit {
            cmd:
                EditCmd::Composite {
                    manifest,
                    originals_root,
                    codes,
                    boxes,
                    crops,
                    recipe,
                },
        } => edit_composite(
            ctx,
            manifest,
            originals_root.as_deref(),
            codes,
            boxes,
            crops,
            recipe.as_deref(),
        ),
        Command::Edit {
            cmd:
                EditCmd::Degrade {
                    manifest,
                    images_root,
                    boxes,
                    recipe,
                },
        } => edit_degrade(
            ctx,
            manifest,
            images_root.as_deref(),
            boxes,
            recipe.as_deref(),
        ),
        Command::Assemble(args) => run_assemble(ctx, args),
        Command::Augment {
            cmd: AugmentCmd::Run { jobs, input_root },
        } => {
            ctx.input(jobs)?;
            ctx.input(input_root)?;
            let jobs = load_jobs(jobs)?;
            let policy = ctx.cfg.augment.unwrap_or_default();
            let n = run_augment_jobs(&jobs, input_root, &ctx.out, &policy)?;
            ctx.summary.output("augmented", n as u64);
            Ok(())
        }
        Command::Metrics {
            cmd: MetricsCmd::Eval { predictions, name },
        } => {
            ctx.input(predictions)?;
            let preds = load_predictions(predictions)?;
            let report = evaluate(&preds)?;
            let name = name.clone().unwrap_or_else(|| stem(predictions));
            let text = report.to_text(&name);
            print!("{text}");
            ctx.write("metrics.txt", text.as_bytes())?;
            ctx.write("metrics.csv", report.to_csv(&name).as_bytes())?;
            ctx.write("metrics.json", json_bytes(&report)?.as_slice())?;
            ctx.summary.output("predictions", report.count);
            Ok(())
        }
        Command::Metrics {
            cmd: MetricsCmd::Fid { a, b },
        } => {
            ctx.input(a)?;
            ctx.input(b)?;
            let (ea, eb) = (load_embeddings(a)?, load_embeddings(b)?);
            let value = fid(&ea, &eb)?;
            println!("FID {value:.4}");
            ctx.write("fid.json", json_bytes(&json!({ "fid": value }))?.as_slice())?;
            ctx.summary.output("embeddings_a", ea.count() as u64);
            ctx.summary.output("embeddings_b", eb.count() as u64);
            Ok(())
        }
        Command::Metrics {
            cmd:
                MetricsCmd::Kid {
                    a,
                    b,
                    subset_size,
                    subsets,
                },
        } => {
            ctx.input(a)?;
            ctx.input(b)?;
            let (ea, eb) = (load_embeddings(a)?, load_embeddings(b)?);
            let base = ctx.cfg.kid.unwrap_or_default();
            let params = KidParams {
                subset_size: subset_size.unwrap_or(base.subset_size),
                n_subsets: subsets.unwrap_or(base.n_subsets),
            };
            let est = kid(&ea, &eb, &params, ctx.seed())?;
            println!("KID {:.6} +/- {:.6}", est.mean, est.std);
            let doc = json!({ "kid_mean": est.mean, "kid_std": est.std, "subset_size": params.subset_size, "n_subsets": params.n_subsets });
            ctx.write("kid.json", json_bytes(&doc)?.as_slice())?;
            ctx.summary.output("embeddings_a", ea.count() as u64);
            ctx.summary.output("embeddings_b", eb.count() as u64);
            Ok(())
        }
        Command::Report {
            cmd: ReportCmd::Counts { manifest },
        } => {
            ctx.input(manifest)?;
            let m = load_manifest(manifest)?;
            let table = report_counts(&m);
            let text = table.to_text();
            print!("{text}");
            ctx.write("counts.txt", text.as_bytes())?;
            ctx.write("counts.csv", table.to_csv().as_bytes())?;
            ctx.summary.output("records", m.len() as u64);
            ctx.summary.output("sources", table.rows.len() as u64);
            Ok(())
        }
        Command::Report {
            cmd:
                ReportCmd::Demographics {
                    manifest,
                    attributes,
                },
        } => {
            ctx.input(attributes)?;
            let attrs = load_attributes(attributes)?;
            let mut columns = Vec::new();
            for path in manifest {
                ctx.input(path)?;
                let tally = tally_attributes(&load_manifest(path)?, &attrs)?;
                ctx.summary
                    .output(&format!("records.{}", stem(path)), tally.total);
                columns.push((stem(path), tally));
            }
            let text = render_demographics(&columns);
            print!("{text}");
            ctx.write("demographics.txt", text.as_bytes())?;
            ctx.write("demographics.csv", demographics_csv(&columns).as_bytes())
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn json_bytes(value: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn prompts_gen(
    ctx: &mut Ctx,
    variant: Option<Variant>,
    space_path: Option<&Path>,
    tables_path: Option<&Path>,
    images_per_prompt: Option<u64>,
) -> Result<()> {
    let cfg = ctx.cfg.prompts.clone();
    let variant = variant.or(cfg.variant).unwrap_or(Variant::Sd);
    let space = match space_path.map(Path::to_path_buf).or(cfg.factor_space) {
        Some(p) => {
            ctx.input(&p)?;
            FactorSpace::load(&p)?
        }
        None => FactorSpace::from_toml(DEFAULT_FACTOR_SPACE)?,
    };
    let tables = match tables_path.map(Path::to_path_buf).or(cfg.tables) {
        Some(p) => {
            ctx.input(&p)?;
            PromptTables::load(&p)?
        }
        None => PromptTables::from_toml(DEFAULT_PROMPT_TABLES)?,
    };
    let specs = enumerate_grid(&space, &tables, variant, ctx.seed())?;
    check_lexicon(&specs, &tables.lexicon)?;
    write_prompt_csv(&specs, ctx.out.join("prompts.csv"))?;
    ctx.summary.output("prompts", specs.len() as u64);
    ctx.count_by_class("prompts", &planned_counts(&specs));
    let per_prompt = images_per_prompt.or(cfg.images_per_prompt).unwrap_or(1);
    ctx.summary
        .output("planned_images", specs.len() as u64 * per_prompt);
    info!("{} {variant} prompts", specs.len());
    Ok(())
}

fn pseudo(
    ctx: &mut Ctx,
    posteriors: &Path,
    threshold: Option<f64>,
    cap: Option<usize>,
    source: Option<&str>,
    path_template: Option<&str>,
) -> Result<()> {
    ctx.input(posteriors)?;
    let posts = load_posteriors(posteriors)?;
    let policy = ctx.cfg.filter_policy(threshold, cap);
    let mut template = RecordTemplate::new(
        source
            .map(str::to_string)
            .or(ctx.cfg.pseudo.source.clone())
            .unwrap_or_else(|| "pseudo".into()),
    );
    if let Some(t) = path_template
        .map(str::to_string)
        .or(ctx.cfg.pseudo.path_template.clone())
    {
        template.path_template = t;
    }
    let (manifest, stats) = pseudo_label(&posts, &policy, &template)?;
    write_manifest(&manifest, ctx.out.join("manifest.jsonl"))?;
    ctx.summary.output("posteriors", stats.total as u64);
    ctx.summary.output("discarded", stats.discarded as u64);
    ctx.summary.output("selected", manifest.len() as u64);
    ctx.count_by_class("passing", &stats.passing);
    ctx.count_by_class("selected", &stats.selected);
    print!("{}", report_counts(&manifest).to_text());
    Ok(())
}

fn recipe(ctx: &mut Ctx, path: Option<&Path>) -> Result<DegradeRecipe> {
    match path {
        Some(p) => {
            ctx.input(p)?;
            DegradeRecipe::load(p)
        }
        None => Ok(ctx.cfg.degrade.unwrap_or_default()),
    }
}

fn manifest_root(manifest: &Path, root: Option<&Path>) -> PathBuf {
    root.map(Path::to_path_buf)
        .unwrap_or_else(|| manifest.parent().unwrap_or(Path::new("")).to_path_buf())
}

fn edit_composite(
    ctx: &mut Ctx,
    manifest: &Path,
    originals_root: Option<&Path>,
    codes: &Path,
    boxes: &Path,
    crops: &Path,
    recipe_path: Option<&Path>,
) -> Result<()> {
    for p in [manifest, codes, boxes, crops] {
        ctx.input(p)?;
    }
    let originals = load_manifest(manifest)?;
    let table = ctx.cfg.angles.clone().unwrap_or_default();
    let codes = load_codes(codes, &table)?;
    let boxes = load_boxes(boxes)?;
    let settings = EditSettings {
        composite: ctx.cfg.composite.unwrap_or_default(),
        degrade: recipe(ctx, recipe_path)?,
    };
    let root = manifest_root(manifest, originals_root);
    let outcome = run_edit_batch(
        &originals, &root, &codes, &boxes, crops, &ctx.out, &settings,
    )?;
    write_manifest(&outcome.manifest, ctx.out.join("manifest.jsonl"))?;
    let mut skipped = String::from("image_id,reason\n");
    for s in &outcome.skipped {
        skipped.push_str(&format!(
            "{},{}\n",
            crate::table::csv_field(&s.image_id),
            crate::table::csv_field(&s.reason)
        ));
    }
    ctx.write("skipped.csv", skipped.as_bytes())?;
    ctx.summary
        .output("composites", outcome.manifest.len() as u64);
    ctx.summary.output("skipped", outcome.skipped.len() as u64);
    Ok(())
}

fn edit_degrade(
    ctx: &mut Ctx,
    manifest: &Path,
    images_root: Option<&Path>,
    boxes: &Path,
    recipe_path: Option<&Path>,
) -> Result<()> {
    ctx.input(manifest)?;
    ctx.input(boxes)?;
    let m = load_manifest(manifest)?;
    let boxes = load_boxes(boxes)?;
    let recipe = recipe(ctx, recipe_path)?;
    let root = manifest_root(manifest, images_root);
    let base_seed = ctx.seed();
    let out = ctx.out.clone();
    let results: Vec<Option<ImageRecord>> = m
        .records()
        .par_iter()
        .map(|r| {
            let Some(b) = boxes.get(&r.image_id) else {
                return Ok(None);
            };
            let img = load_image(root.join(&r.path))?;
            let seed = seed::derive(base_seed, &format!("degrade/{}", r.image_id));
            let rel = format!("images/{}.png", r.image_id);
            write_file(
                &out.join(&rel),
                &encode_png(&degrade(&img, b, &recipe, seed)?)?,
            )?;
            Ok(Some(ImageRecord {
                path: rel,
                ..r.clone()
            }))
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    for (r, done) in m.iter().zip(results) {
        match done {
            Some(rec) => records.push(rec),
            None => warn!("skipping {}: no face box", r.image_id),
        }
    }
    let skipped = m.len() - records.len();
    let outm = Manifest::new(records)?;
    write_manifest(&outm, ctx.out.join("manifest.jsonl"))?;
    ctx.summary.output("degraded", outm.len() as u64);
    ctx.summary.output("skipped", skipped as u64);
    Ok(())
}

fn run_assemble(ctx: &mut Ctx, args: &AssembleArgs) -> Result<()> {
    ctx.input(&args.plan)?;
    let mut plan = AssemblyPlan::load(&args.plan)?;
    if let Some(r) = args.regime {
        plan.regime = r;
    }
    if let Some(c) = args.cap {
        plan.per_class_cap = c;
    }
    if let Some(s) = ctx.seed {
        plan.seed = s;
    }
    ctx.summary.seed = plan.seed;
    for p in plan.real.iter().chain(&plan.synthetic) {
        ctx.input(p)?;
    }
    let inputs = plan.load_inputs()?;
    let out = assemble(&plan, &inputs)?;
    write_manifest(&out.manifest, ctx.out.join("manifest.jsonl"))?;
    let text = out.report.to_text();
    print!("{text}");
    ctx.write("count_report.txt", text.as_bytes())?;
    ctx.write("count_report.csv", out.report.to_csv().as_bytes())?;
    if plan.regime.is_augmenting() {
        write_jobs(&out.jobs, ctx.out.join("augment_jobs.csv"))?;
    }
    ctx.summary.output("records", out.manifest.len() as u64);
    ctx.summary.output("augment_jobs", out.jobs.len() as u64);
    ctx.count_by_class("records", &out.manifest.class_counts());
    Ok(())
}
