//! Simulation core for model-to-model common-ground building on the tangram
//! naming task.
//!
//! A sender agent perceives a rotated tangram silhouette, imagines a
//! representation of it and describes it with a few discrete tokens. A
//! receiver interprets the tokens and picks one of six candidate silhouettes.
//! Successful episodes are fed back into the sender's perceiver through
//! success-filtered gradient calibration.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, the remote backend
//! and the command line live in the `tangram-sim` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dataset;
pub mod episode;
mod error;
pub mod figures;
pub mod geometry;
pub mod learning;
pub mod nn;
pub mod pipeline;
pub mod raster;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
