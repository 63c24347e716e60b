//! Curation engine for class-balanced synthetic facial-expression datasets.
//!
//! The crate covers the data side of three dataset-building pipelines:
//!
//! * [`pseudolabel`]: teacher posteriors to thresholded, per-class capped manifests.
//! * [`promptforge`]: factor-grid prompt synthesis for text-to-image and
//!   AU-conditioned generators.
//! * [`editpipe`]: compositing GAN-edited face crops back into their originals
//!   and degrading the paste seam ahead of an external restorer.
//!
//! [`assembler`] turns the resulting manifests into training sets under the
//! supported regimes, and [`metrics`] scores predictions and embedding sets.
//! Every neural model lives outside the engine; its outputs arrive through the
//! exchange formats in [`dataset`].

pub mod assembler;
pub mod cli;
pub mod dataset;
pub mod editpipe;
mod error;
pub mod imageops;
pub mod metrics;
pub mod promptforge;
pub mod pseudolabel;
pub mod seed;
mod table;

pub use dataset::{ClassLabel, EmbeddingSet, ImageRecord, Manifest, Posterior, Split};
pub use error::{Error, Result};
