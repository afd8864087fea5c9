//! Std companion of `tangram-core`: file formats, the HTTP backend, report
//! bundles, the on-disk partner memory and the `tangram` command line.

pub mod cli;
pub mod config;
mod error;
pub mod experiment;
pub mod formats;
pub mod fsio;
pub mod partners;
pub mod remote;
pub mod report;

pub use error::{SimError, SimResult};
