//! Episode log: one JSON object per line.
//!
//! Rasters are referenced by content hash. Scores of candidates that could
//! not be scored (negative infinity in memory) are written as `null`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tangram_core::episode::{EpisodeRecord, TrialResult};

use crate::error::{SimError, SimResult};

pub const EPISODE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLine {
    pub schema_version: u32,
    /// Learning run, absent for the shared initial trial and for single trials.
    pub run: Option<usize>,
    /// 0 for the initial (or only) trial, then 1-based learning trials.
    pub trial: usize,
    pub figure_id: u32,
    pub sender_angle: u8,
    pub receiver_angles: Vec<u8>,
    pub sender_raster: String,
    pub label_probs: Option<Vec<f64>>,
    pub top_index: Option<usize>,
    pub message: Option<Vec<String>>,
    pub chosen_id: Option<u32>,
    pub success: bool,
    pub scores: Vec<Option<f64>>,
    pub error: Option<String>,
}

impl EpisodeLine {
    pub fn new(run: Option<usize>, trial: usize, e: &EpisodeRecord) -> Self {
        EpisodeLine {
            schema_version: EPISODE_SCHEMA_VERSION,
            run,
            trial,
            figure_id: e.figure_id,
            sender_angle: e.sender_angle,
            receiver_angles: e.receiver_angles.clone(),
            sender_raster: e.sender_raster.clone(),
            label_probs: e.label_dist.as_ref().map(|d| d.probs.clone()),
            top_index: e.label_dist.as_ref().map(|d| d.top_index),
            message: e.message.as_ref().map(|m| m.tokens.clone()),
            chosen_id: e.chosen_id,
            success: e.success,
            scores: e.scores.iter().map(|s| s.is_finite().then_some(*s)).collect(),
            error: e.error.clone(),
        }
    }
}

/// Append every episode of `trial` to `out` as JSON lines.
pub fn write_trial(out: &mut Vec<u8>, run: Option<usize>, index: usize, trial: &TrialResult) {
    for e in &trial.episodes {
        serde_json::to_writer(&mut *out, &EpisodeLine::new(run, index, e)).expect("episode line serializes");
        out.push(b'\n');
    }
}

pub fn parse(text: &str, origin: &Path) -> SimResult<Vec<EpisodeLine>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line: EpisodeLine =
                serde_json::from_str(l).map_err(|e| SimError::format(origin, format!("line {}: {e}", i + 1)))?;
            if line.schema_version != EPISODE_SCHEMA_VERSION {
                return Err(SimError::format(
                    origin,
                    format!("line {}: unsupported schema_version {}", i + 1, line.schema_version),
                ));
            }
            Ok(line)
        })
        .collect()
}
