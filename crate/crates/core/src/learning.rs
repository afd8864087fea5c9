//! Success-filtered calibration, repeated-trial learning runs and the
//! partner-keyed parameter memory.

use alloc::{collections::BTreeMap, format, string::String, vec, vec::Vec};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::episode::{run_trial, ReceiverAngles, TrialResult};
use crate::nn::{argmax, forward, loss_and_grad, sgd_step, LossKind, ParameterSet, TrainingPair};
use crate::pipeline::{Receiver, Sender};
use crate::raster::{RasterView, ViewBank};
use crate::{seed, Error, Result};

/// What a successful episode teaches the perceiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationTarget {
    /// The probability vector recorded during the episode. When the
    /// perceiver has not changed since recording this is a fixed point and
    /// calibration leaves the parameters untouched.
    Recorded,
    /// One-hot on the label the sender acted on, i.e. a policy-gradient
    /// step with reward one for each success.
    #[default]
    TopLabel,
    /// Each side's view of the referent is trained toward the output the
    /// other side's view produced, so the two perceptions converge.
    Partner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Passes without improvement before stopping.
    pub patience: usize,
    pub max_passes: usize,
    pub loss: LossKind,
    pub target: CalibrationTarget,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            lr: 0.02,
            batch_size: 1,
            epochs: 1,
            patience: 10,
            max_passes: 20,
            loss: LossKind::Mse,
            target: CalibrationTarget::TopLabel,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 || self.patience == 0 || self.max_passes == 0 {
            return Err(Error::InvalidArgument("calibration counts must be positive".into()));
        }
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return Err(Error::InvalidArgument(format!("calibration lr {} must be finite and non-negative", self.lr)));
        }
        Ok(())
    }
}

/// A sender input from a successful episode and the output recorded for it,
/// plus the receiver's view of the same figure.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSample {
    pub raster: RasterView,
    pub recorded: Vec<f64>,
    pub partner_raster: RasterView,
}

fn one_hot(probs: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; probs.len()];
    t[argmax(probs)] = 1.0;
    t
}

/// (input, target) pairs for a calibration call under `mode`.
pub fn training_set(
    params: &ParameterSet,
    samples: &[CalibrationSample],
    mode: CalibrationTarget,
) -> Result<Vec<(RasterView, Vec<f64>)>> {
    let mut out = Vec::with_capacity(samples.len() * 2);
    for s in samples {
        match mode {
            CalibrationTarget::Recorded => out.push((s.raster.clone(), s.recorded.clone())),
            CalibrationTarget::TopLabel => out.push((s.raster.clone(), one_hot(&s.recorded))),
            CalibrationTarget::Partner => {
                let partner = forward(params, &s.partner_raster)?.dist.probs;
                out.push((s.raster.clone(), partner));
                out.push((s.partner_raster.clone(), s.recorded.clone()));
            }
        }
    }
    Ok(out)
}

/// One sample per successful, error-free episode, in episode order.
pub fn filter_successes(trial: &TrialResult, bank: &ViewBank) -> Vec<CalibrationSample> {
    trial
        .episodes
        .iter()
        .filter(|e| e.success && e.error.is_none())
        .filter_map(|e| {
            let dist = e.label_dist.as_ref()?;
            let fid = e.figure_id as usize;
            Some(CalibrationSample {
                raster: bank.view(fid, e.sender_angle).clone(),
                recorded: dist.probs.clone(),
                partner_raster: bank.view(fid, *e.receiver_angles.get(fid)?).clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    /// Parameters with the lowest evaluated loss, possibly the input ones.
    pub params: ParameterSet,
    /// Loss on the success set before any update.
    pub initial_loss: Option<f64>,
    /// Loss on the success set after each pass.
    pub pass_losses: Vec<f64>,
    pub no_successes: bool,
}

fn mean_loss(params: &ParameterSet, pairs: &[TrainingPair<'_>], loss: LossKind) -> Result<f64> {
    let mut sum = 0.0;
    for p in pairs {
        let q = forward(params, p.image)?.dist.probs;
        sum += match loss {
            LossKind::Mse => q.iter().zip(p.target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / q.len() as f64,
            LossKind::CrossEntropy => {
                -p.target.iter().zip(&q).map(|(t, qi)| if *t > 0.0 { t * libm::log(qi.max(1e-300)) } else { 0.0 }).sum::<f64>()
            }
        };
    }
    Ok(sum / pairs.len() as f64)
}

/// Passes of SGD over the success set with early stopping on the evaluated
/// loss. `shuffle_seed` orders samples within each pass.
pub fn calibrate(
    params: &ParameterSet,
    samples: &[CalibrationSample],
    cfg: &CalibrationConfig,
    shuffle_seed: u64,
) -> Result<CalibrationOutcome> {
    cfg.validate()?;
    if samples.is_empty() {
        return Ok(CalibrationOutcome { params: params.clone(), initial_loss: None, pass_losses: Vec::new(), no_successes: true });
    }
    let set = training_set(params, samples, cfg.target)?;
    let pairs: Vec<TrainingPair<'_>> = set.iter().map(|(r, t)| TrainingPair { image: r, target: t }).collect();

    let initial_loss = mean_loss(params, &pairs, cfg.loss)?;
    let mut best = (params.clone(), initial_loss);
    let mut current = params.clone();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut pass_losses = Vec::new();
    let mut stale = 0;
    for pass in 0..cfg.max_passes {
        let wrap = |source: Error| Error::Calibration { pass, source: alloc::boxed::Box::new(source) };
        for epoch in 0..cfg.epochs {
            let salt = (pass * cfg.epochs + epoch) as u64;
            order.shuffle(&mut seed::rng(seed::derive(shuffle_seed, "calibrate", salt)));
            for chunk in order.chunks(cfg.batch_size) {
                let batch: Vec<TrainingPair<'_>> = chunk.iter().map(|&i| pairs[i]).collect();
                let (_, grads) = loss_and_grad(&current, &batch, cfg.loss).map_err(wrap)?;
                current = sgd_step(&current, &grads, cfg.lr).map_err(wrap)?;
            }
        }
        let loss = mean_loss(&current, &pairs, cfg.loss).map_err(wrap)?;
        if !loss.is_finite() {
            return Err(wrap(Error::NumericalOverflow { layer: "loss".into() }));
        }
        pass_losses.push(loss);
        if loss < best.1 {
            best = (current.clone(), loss);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    Ok(CalibrationOutcome { params: best.0, initial_loss: Some(initial_loss), pass_losses, no_successes: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearningConfig {
    /// Learning trials after the shared initial trial.
    pub trials: usize,
    pub runs: usize,
    pub receiver_angles: ReceiverAngles,
    pub calibration: CalibrationConfig,
    pub seed: u64,
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            trials: 10,
            runs: 10,
            receiver_angles: ReceiverAngles::Random,
            calibration: CalibrationConfig::default(),
            seed: 0,
        }
    }
}

/// Accuracy per run (rows) and trial (columns); column 0 is the shared
/// initial trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySeries {
    pub rows: Vec<Vec<f64>>,
}

impl AccuracySeries {
    pub fn initial(&self) -> f64 {
        self.rows[0][0]
    }

    /// Every entry after column 0, run-major.
    pub fn post_initial(&self) -> Vec<f64> {
        self.rows.iter().flat_map(|r| r[1..].iter().copied()).collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let cols = self.rows.first().map_or(0, Vec::len);
        (0..cols).map(|c| self.rows.iter().map(|r| r[c]).sum::<f64>() / self.rows.len() as f64).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    /// Learning trials 1..=trials.
    pub trials: Vec<TrialResult>,
    /// One per trial including the initial one, in order.
    pub calibrations: Vec<CalibrationOutcome>,
    pub final_params: ParameterSet,
}

#[derive(Debug, Clone)]
pub struct LearningOutcome {
    pub initial: TrialResult,
    pub runs: Vec<RunRecord>,
    pub series: AccuracySeries,
}

fn trial_accuracy(t: &TrialResult) -> Result<f64> {
    t.accuracy.ok_or(Error::EmptyConfusion)
}

/// Seed of learning trial `trial` (1-based) in run `run`.
pub fn trial_seed(master: u64, run: usize, trial: usize) -> u64 {
    seed::derive(seed::derive(master, "run", run as u64), "trial", trial as u64)
}

/// The initial trial, shared by every run.
pub fn initial_seed(master: u64) -> u64 {
    seed::derive(master, "initial-trial", 0)
}

/// Binds both agents to the current perceiver parameters. A binding that
/// ignores the parameters for one side keeps that side fixed.
pub type AgentFactory<'a> = dyn Fn(&ParameterSet) -> Result<(Sender, Receiver)> + 'a;

/// Independent runs of repeated trials, each starting from `base` and
/// calibrating the perceiver after every trial.
pub fn run_learning(
    base: &ParameterSet,
    bank: &ViewBank,
    agents: &AgentFactory<'_>,
    cfg: &LearningConfig,
) -> Result<LearningOutcome> {
    if cfg.trials == 0 || cfg.runs == 0 {
        return Err(Error::InvalidArgument("trials and runs must be at least 1".into()));
    }
    cfg.calibration.validate()?;
    let (sender, receiver) = agents(base)?;
    let initial = run_trial(&sender, &receiver, bank, cfg.receiver_angles, initial_seed(cfg.seed))?;
    let initial_acc = trial_accuracy(&initial)?;
    let initial_successes = filter_successes(&initial, bank);

    let mut runs = Vec::with_capacity(cfg.runs);
    let mut rows = Vec::with_capacity(cfg.runs);
    for run in 0..cfg.runs {
        let run_seed = seed::derive(cfg.seed, "run", run as u64);
        let first = calibrate(base, &initial_successes, &cfg.calibration, seed::derive(run_seed, "calibration", 0))?;
        let mut params = first.params.clone();
        let mut calibrations = vec![first];
        let mut trials = Vec::with_capacity(cfg.trials);
        let mut row = vec![initial_acc];
        for t in 1..=cfg.trials {
            let (sender, receiver) = agents(&params)?;
            let trial = run_trial(&sender, &receiver, bank, cfg.receiver_angles, trial_seed(cfg.seed, run, t))?;
            row.push(trial_accuracy(&trial)?);
            let outcome = calibrate(
                &params,
                &filter_successes(&trial, bank),
                &cfg.calibration,
                seed::derive(run_seed, "calibration", t as u64),
            )?;
            params = outcome.params.clone();
            calibrations.push(outcome);
            trials.push(trial);
        }
        rows.push(row);
        runs.push(RunRecord { trials, calibrations, final_params: params });
    }
    Ok(LearningOutcome { initial, runs, series: AccuracySeries { rows } })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartnerMeta {
    pub trials: u64,
    pub last_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PartnerSnapshot {
    pub version: u64,
    pub params: ParameterSet,
    pub meta: PartnerMeta,
}

/// Parameter snapshots keyed by partner id. Snapshots are never modified;
/// storing again appends a new version.
#[derive(Debug, Clone)]
pub struct PartnerMemory {
    base: ParameterSet,
    partners: BTreeMap<String, Vec<PartnerSnapshot>>,
}

impl PartnerMemory {
    pub fn new(base: ParameterSet) -> Self {
        PartnerMemory { base, partners: BTreeMap::new() }
    }

    pub fn base(&self) -> &ParameterSet {
        &self.base
    }

    pub fn store(mut self, partner_id: &str, params: ParameterSet, meta: PartnerMeta) -> Self {
        let history = self.partners.entry(partner_id.into()).or_default();
        let version = history.last().map_or(1, |s| s.version + 1);
        history.push(PartnerSnapshot { version, params, meta });
        self
    }

    /// Insert a snapshot with a known version, e.g. when loading from disk.
    pub fn restore(&mut self, partner_id: &str, snapshot: PartnerSnapshot) {
        let history = self.partners.entry(partner_id.into()).or_default();
        history.push(snapshot);
        history.sort_by_key(|s| s.version);
    }

    /// Latest snapshot for the partner, or the base parameters.
    pub fn retrieve(&self, partner_id: &str) -> &ParameterSet {
        self.latest(partner_id).map_or(&self.base, |s| &s.params)
    }

    pub fn latest(&self, partner_id: &str) -> Option<&PartnerSnapshot> {
        self.partners.get(partner_id).and_then(|h| h.last())
    }

    pub fn history(&self, partner_id: &str) -> &[PartnerSnapshot] {
        self.partners.get(partner_id).map_or(&[], Vec::as_slice)
    }

    pub fn partner_ids(&self) -> impl Iterator<Item = &str> {
        self.partners.keys().map(String::as_str)
    }
}
