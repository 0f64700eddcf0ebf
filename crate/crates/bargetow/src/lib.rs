//! File formats, configuration and the command-line pipeline around
//! [`bargetow_core`].

pub mod ais_csv;
pub mod artifact;
pub mod cli;
pub mod config;
pub mod error;
pub mod geojson;
pub mod pipeline;
pub mod tables;
pub mod timefmt;

pub use error::{Error, Result};
