//! Reference games: one episode per (figure, sender angle), 48 per trial.

use alloc::{format, string::String, vec, vec::Vec};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::nn::LabelDistribution;
use crate::pipeline::{Message, Receiver, Sender};
use crate::raster::{RasterView, ViewBank};
use crate::{seed, Error, Result};

pub const ANGLES: u8 = 8;

/// How the receiver's board is rotated within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "steps")]
pub enum ReceiverAngles {
    /// One seeded angle per figure, drawn once per trial.
    #[default]
    Random,
    /// Every candidate is shown at the sender's angle plus this many steps.
    Offset(u8),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub figure_id: u32,
    pub sender_angle: u8,
    /// Receiver angle of each figure, indexed by figure id.
    pub receiver_angles: Vec<u8>,
    pub label_dist: Option<LabelDistribution>,
    pub message: Option<Message>,
    pub chosen_id: Option<u32>,
    pub success: bool,
    /// Identification score of each figure, indexed by figure id.
    pub scores: Vec<f64>,
    pub error: Option<String>,
    /// Content hash of the sender's raster.
    pub sender_raster: String,
}

impl EpisodeRecord {
    pub fn errored(&self) -> bool {
        self.error.is_some()
    }
}

/// Counts of (intended figure, chosen figure).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(n: usize) -> Self {
        ConfusionMatrix { counts: vec![vec![0; n]; n] }
    }

    pub fn size(&self) -> usize {
        self.counts.len()
    }

    pub fn record(&mut self, intended: usize, chosen: usize) {
        self.counts[intended][chosen] += 1;
    }

    pub fn get(&self, intended: usize, chosen: usize) -> u64 {
        self.counts[intended][chosen]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.size()).map(|i| self.counts[i][i]).sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

/// Fraction of counted episodes on the diagonal.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    match cm.total() {
        0 => Err(Error::EmptyConfusion),
        total => Ok(cm.trace() as f64 / total as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub episodes: Vec<EpisodeRecord>,
    pub confusion: ConfusionMatrix,
    /// `None` when every episode errored.
    pub accuracy: Option<f64>,
    pub errored: usize,
}

/// One episode. Stage failures are recorded on the episode instead of
/// aborting; `order` is the presentation order of figure ids to the receiver.
pub fn run_episode(
    sender: &Sender,
    receiver: &Receiver,
    bank: &ViewBank,
    figure_id: u32,
    sender_angle: u8,
    receiver_angles: &[u8],
    order: &[u32],
    seed: u64,
) -> Result<EpisodeRecord> {
    let n = bank.len();
    if receiver_angles.len() != n || order.len() != n {
        return Err(Error::InvalidArgument(format!("board needs {n} angles and {n} positions")));
    }
    let mut seen = vec![false; n];
    for &id in order {
        if id as usize >= n || core::mem::replace(&mut seen[id as usize], true) {
            return Err(Error::InvalidArgument("presentation order is not a permutation".into()));
        }
    }
    if figure_id as usize >= n {
        return Err(Error::InvalidArgument(format!("figure {figure_id} not on the board")));
    }
    let view = bank.view(figure_id as usize, sender_angle);
    let mut record = EpisodeRecord {
        figure_id,
        sender_angle,
        receiver_angles: receiver_angles.to_vec(),
        label_dist: None,
        message: None,
        chosen_id: None,
        success: false,
        scores: vec![f64::NEG_INFINITY; n],
        error: None,
        sender_raster: view.content_hash(),
    };

    let candidates: Vec<RasterView> = order
        .iter()
        .map(|&id| bank.view(id as usize, receiver_angles[id as usize]).clone())
        .collect();

    let outcome = (|| -> Result<()> {
        let dist = sender.perceive.perceive(view, seed)?;
        let label = sender.vocab.labels().get(dist.top_index).cloned().ok_or_else(|| {
            Error::InvalidVocabulary(format!("top label {} has no token", dist.top_index))
        })?;
        record.label_dist = Some(dist);
        let r = sender.imagine.imagine(&label, view, seed)?;
        let msg = sender.describe.describe(&r, seed)?;
        record.message = Some(msg.clone());
        let id = receiver.receive(&msg, &candidates, seed)?;
        if id.scores.len() != n || id.index >= n {
            return Err(Error::InvalidArgument("identify returned a malformed result".into()));
        }
        for (pos, &fid) in order.iter().enumerate() {
            record.scores[fid as usize] = id.scores[pos];
        }
        let chosen = order[id.index];
        record.chosen_id = Some(chosen);
        record.success = chosen == figure_id;
        Ok(())
    })();
    if let Err(e) = outcome {
        record.error = Some(format!("{e}"));
    }
    Ok(record)
}

/// Seeded receiver angle of each figure, fixed for a whole trial.
pub fn draw_receiver_angles(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = seed::rng(seed::derive(seed, "receiver-angles", 0));
    (0..n).map(|_| rng.gen_range(0..ANGLES)).collect()
}

/// Play all figures at all sender angles. Errored episodes are kept in the
/// record but excluded from the confusion matrix and accuracy.
pub fn run_trial(
    sender: &Sender,
    receiver: &Receiver,
    bank: &ViewBank,
    angles: ReceiverAngles,
    seed: u64,
) -> Result<TrialResult> {
    let n = bank.len();
    let drawn = draw_receiver_angles(n, seed);
    let order: Vec<u32> = (0..n as u32).collect();
    let mut episodes = Vec::with_capacity(n * ANGLES as usize);
    let mut confusion = ConfusionMatrix::new(n);
    let mut errored = 0;
    for fid in 0..n as u32 {
        for angle in 0..ANGLES {
            let board = match angles {
                ReceiverAngles::Random => drawn.clone(),
                ReceiverAngles::Offset(k) => vec![(angle + k) % ANGLES; n],
            };
            let ep_seed = seed::derive(seed, "episode", u64::from(fid) * u64::from(ANGLES) + u64::from(angle));
            let rec = run_episode(sender, receiver, bank, fid, angle, &board, &order, ep_seed)?;
            match rec.chosen_id {
                Some(chosen) if rec.error.is_none() => confusion.record(fid as usize, chosen as usize),
                _ => errored += 1,
            }
            episodes.push(rec);
        }
    }
    let accuracy = accuracy(&confusion).ok();
    Ok(TrialResult { episodes, confusion, accuracy, errored })
}
