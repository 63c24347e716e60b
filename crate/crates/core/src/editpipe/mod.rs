//! Edit compositing: polar codes for the external GAN editor, paste-back of
//! its edited crops, and the degradation handed to the external restorer.

mod batch;
mod codes;
mod composite;
mod degrade;

pub use batch::{
    crop_path, load_boxes, run_edit_batch, write_boxes, BatchOutcome, EditSettings, FaceBoxes,
    Skip, BOXES_HEADER,
};
pub use codes::{
    angular_distance, assign_codes, codes_csv, load_codes, sample_codes, write_codes, AngleTable,
    CodeRecord, PolarCode, SamplingPolicy, CODES_HEADER,
};
pub use composite::{context_band, paste_back, CompositeParams};
pub use degrade::{degrade, DegradeRecipe};
