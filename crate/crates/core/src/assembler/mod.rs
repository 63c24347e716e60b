//! Training-set assembly under the real/synthetic mixing regimes, with
//! per-class count accounting.

mod assemble;
mod jobs;
mod plan;
mod report;

pub use assemble::{assemble, Assembly};
pub use jobs::{
    augment_targets, emit_augment_jobs, jobs_csv, load_jobs, run_augment_jobs, write_jobs,
    AugmentJob, AUGMENTED_SOURCE, JOBS_HEADER,
};
pub use plan::{AssemblyInputs, AssemblyPlan, Regime};
pub use report::{report_counts, table_row, CountReport, CountRow, CountTable, TABLE_COLUMNS};
