//! The `ferforge` command line. Every subcommand writes `run_summary.json`
//! into `--out`, whether it succeeds or not.

mod commands;
mod config;
mod summary;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{FileConfig, PromptsConfig, PseudoConfig};
pub use summary::{digest_path, RunSummary};

use crate::assembler::Regime;
use crate::dataset::ClassLabel;
use crate::editpipe::SamplingPolicy;
use crate::promptforge::Variant;

pub const SUMMARY_FILE: &str = "run_summary.json";

#[derive(Debug, Parser)]
#[command(
    name = "ferforge",
    version,
    about = "Curate class-balanced facial-expression datasets",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML file with defaults for any subcommand; flags win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value = "ferforge-out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prompt grids for text-to-image generators.
    Prompts {
        #[command(subcommand)]
        cmd: PromptsCmd,
    },
    /// Pseudo-labeling from teacher posteriors.
    Pseudo {
        #[command(subcommand)]
        cmd: PseudoCmd,
    },
    /// GAN-edit compositing.
    Edit {
        #[command(subcommand)]
        cmd: EditCmd,
    },
    /// Build a training manifest from an assembly plan.
    Assemble(AssembleArgs),
    /// Execute augmentation jobs.
    Augment {
        #[command(subcommand)]
        cmd: AugmentCmd,
    },
    /// Classification scores, FID and KID.
    Metrics {
        #[command(subcommand)]
        cmd: MetricsCmd,
    },
    /// Count and demographic tables.
    Report {
        #[command(subcommand)]
        cmd: ReportCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum PromptsCmd {
    /// Enumerate the factor grid and write `prompts.csv`.
    Gen {
        #[arg(long)]
        variant: Option<Variant>,
        #[arg(long)]
        factor_space: Option<PathBuf>,
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Recorded in the summary as the planned image count.
        #[arg(long)]
        images_per_prompt: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PseudoCmd {
    /// Threshold and cap posteriors into `manifest.jsonl`.
    Label {
        #[arg(long)]
        posteriors: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        cap: Option<usize>,
        /// Source tag written into every record.
        #[arg(long)]
        source: Option<String>,
        /// Relative image path; `{id}` is replaced by the image id.
        #[arg(long)]
        path_template: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum EditCmd {
    /// Draw one polar code per (original, target) into `codes.csv`.
    SampleCodes {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        policy: SamplingPolicy,
        /// Comma-separated target classes; all seven by default.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<ClassLabel>,
    },
    /// Paste edited crops back, degrade, and write images plus a manifest.
    Composite {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory the manifest paths are relative to; defaults to the
        /// manifest's directory.
        #[arg(long)]
        originals_root: Option<PathBuf>,
        #[arg(long)]
        codes: PathBuf,
        #[arg(long)]
        boxes: PathBuf,
        #[arg(long)]
        crops: PathBuf,
        /// Degradation recipe TOML.
        #[arg(long)]
        recipe: Option<PathBuf>,
    },
    /// Apply only the ring-and-global degradation to manifest images.
    Degrade {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        images_root: Option<PathBuf>,
        #[arg(long)]
        boxes: PathBuf,
        #[arg(long)]
        recipe: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct AssembleArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub regime: Option<Regime>,
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum AugmentCmd {
    /// Run `augment_jobs.csv` from an assembly.
    Run {
        #[arg(long)]
        jobs: PathBuf,
        /// Directory the job source paths are relative to.
        #[arg(long)]
        input_root: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum MetricsCmd {
    /// Accuracy, macro-F1, class-wise accuracy and confusion matrix.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        /// Row label in the reports; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Frechet distance between two EMB1 embedding sets.
    Fid {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Subset-averaged polynomial-kernel MMD between two EMB1 embedding sets.
    Kid {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        subset_size: Option<usize>,
        #[arg(long)]
        subsets: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    /// Per-source class counts.
    Counts {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Gender, race and age tallies; one column per manifest.
    Demographics {
        #[arg(long, required = true)]
        manifest: Vec<PathBuf>,
        #[arg(long)]
        attributes: PathBuf,
    },
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("FERFORGE_LOG", "info");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` and runs; returns the process exit code: 0 on success, 1 on
/// usage or validation errors, 2 on I/O errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            }
        }
    }
}

/// Runs a parsed command line and writes its summary.
pub fn run(cli: Cli) -> i32 {
    let mut ctx = commands::Ctx {
        cfg: FileConfig::default(),
        seed: cli.global.seed,
        out: cli.global.out.clone(),
        summary: RunSummary {
            subcommand: commands::name(&cli.command).to_string(),
            ..Default::default()
        },
    };
    let result = prepare_and_execute(&cli, &mut ctx);
    let summary = &mut ctx.summary;
    match &result {
        Ok(()) => summary.status = "ok".into(),
        Err(e) => {
            summary.status = "error".into();
            summary.error = Some(e.to_string());
        }
    }
    let written =
        crate::dataset::write_file(&ctx.out.join(SUMMARY_FILE), summary.to_json().as_bytes());
    match (result, written) {
        (Ok(()), Ok(())) => 0,
        (Err(e), _) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
        (Ok(()), Err(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn prepare_and_execute(cli: &Cli, ctx: &mut commands::Ctx) -> crate::Result<()> {
    if let Some(path) = &cli.global.config {
        ctx.summary.input(path)?;
        ctx.cfg = FileConfig::load(path)?;
    }
    ctx.seed = cli.global.seed.or(ctx.cfg.seed);
    ctx.summary.seed = ctx.seed.unwrap_or(0);
    let workers = cli.global.workers.or(ctx.cfg.workers);
    ctx.summary.workers = workers;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| crate::Error::Invalid(format!("cannot start {workers:?} workers: {e}")))?;
    pool.install(|| commands::execute(&cli.command, ctx))
}
