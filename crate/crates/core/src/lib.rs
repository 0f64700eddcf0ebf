//! Core algorithms for estimating barge tow size from AIS vessel tracks.
//!
//! Everything in this crate is pure computation over in-memory data and builds
//! under `no_std` with `alloc`. File formats, configuration and the command
//! line driver live in the `bargetow` companion crate.
//!
//! The pipeline, in order:
//!
//! - [`ais`]: record validation and per-vessel cleaning.
//! - [`trajectory`]: low-speed stop detection and trip segmentation.
//! - [`features`]: the 39 trip-level statistics.
//! - [`fusion`]: matching georeferenced detections to tracks, labeled datasets.
//! - [`models`]: Poisson GLM, ElasticNet, random forest and AdaBoost.R2.
//! - [`evaluation`]: stratified folds, MAE, cross-validation and RFECV.
//! - [`synth`]: seeded synthetic trips for testing without proprietary data.
#![no_std]
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ais;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod fusion;
pub mod geo;
pub(crate) mod math;
pub mod models;
pub mod stats;
pub mod synth;
pub mod time;
pub mod trajectory;

pub use error::{Error, Result};
