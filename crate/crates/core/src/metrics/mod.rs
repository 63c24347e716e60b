//! Evaluation: classification scores from prediction files, FID and KID from
//! embedding sets, and demographic tallies from attribute files.

mod classification;
mod demographics;
mod fid;
mod kid;

pub use classification::{
    confusion, evaluate, load_predictions, write_predictions, ClassificationReport, Confusion,
    Prediction, PredictionSet, PREDICTION_HEADER,
};
pub use demographics::{
    demographics_csv, load_attributes, render_demographics, tally_attributes, with_thousands,
    write_attributes, AgeBucket, AttributeRecord, Attributes, DemographicTally, Gender, Race,
    ATTRIBUTE_HEADER,
};
pub use fid::{fid, fid_from_summaries, GaussianSummary};
pub use kid::{kid, mmd2_unbiased, KidEstimate, KidParams};
