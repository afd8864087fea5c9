use alloc::{vec, vec::Vec};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{forward, loss_and_grad, sgd_step, LossKind, NetSpec, ParameterSet, TrainingPair};
use crate::raster::RasterView;
use crate::{seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRaster {
    pub raster: RasterView,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig { epochs: 6, lr: 0.05, batch_size: 16, val_fraction: 0.2, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    pub params: ParameterSet,
    pub val_accuracy: f64,
    pub epoch_losses: Vec<f64>,
    pub train_size: usize,
    pub val_size: usize,
}

/// Train a fresh perceiver with minibatch SGD on cross-entropy and report
/// accuracy on a held-out split. Everything is derived from `hp.seed`.
pub fn pretrain(spec: &NetSpec, dataset: &[LabeledRaster], hp: &PretrainConfig) -> Result<PretrainOutcome> {
    if hp.epochs == 0 || hp.batch_size == 0 || !(hp.lr > 0.0) || !(hp.val_fraction > 0.0 && hp.val_fraction < 1.0) {
        return Err(Error::InvalidArgument("pretrain hyperparameters must be positive".into()));
    }
    let labels = spec.labels()?;
    if let Some(bad) = dataset.iter().find(|s| s.label >= labels) {
        return Err(Error::InvalidArgument(alloc::format!("label {} outside 0..{labels}", bad.label)));
    }
    let first = dataset.first().map(|s| s.label);
    if first.is_none() || dataset.iter().all(|s| Some(s.label) == first) {
        return Err(Error::DegenerateLabels);
    }

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut seed::rng(seed::derive(hp.seed, "split", 0)));
    let val_size = (libm::round(dataset.len() as f64 * hp.val_fraction) as usize).clamp(1, dataset.len() - 1);
    let (val_idx, train_idx) = order.split_at(val_size);
    let mut train_idx = train_idx.to_vec();

    let targets: Vec<Vec<f64>> = (0..labels)
        .map(|l| {
            let mut t = vec![0.0; labels];
            t[l] = 1.0;
            t
        })
        .collect();

    let mut params = ParameterSet::init(spec.clone(), seed::derive(hp.seed, "init", 0))?;
    let mut epoch_losses = Vec::with_capacity(hp.epochs);
    for epoch in 0..hp.epochs {
        train_idx.shuffle(&mut seed::rng(seed::derive(hp.seed, "epoch", epoch as u64)));
        let mut sum = 0.0;
        let mut batches = 0usize;
        for chunk in train_idx.chunks(hp.batch_size) {
            let batch: Vec<TrainingPair<'_>> = chunk
                .iter()
                .map(|&i| TrainingPair { image: &dataset[i].raster, target: &targets[dataset[i].label] })
                .collect();
            let (loss, grads) = loss_and_grad(&params, &batch, LossKind::CrossEntropy)?;
            params = sgd_step(&params, &grads, hp.lr)?;
            sum += loss;
            batches += 1;
        }
        epoch_losses.push(sum / batches.max(1) as f64);
    }

    let val: Vec<&LabeledRaster> = val_idx.iter().map(|&i| &dataset[i]).collect();
    let val_accuracy = evaluate_accuracy(&params, val.iter().copied())?;
    Ok(PretrainOutcome { params: params.with_version(0), val_accuracy, epoch_losses, train_size: train_idx.len(), val_size })
}

/// Fraction of samples whose top label equals their class.
pub fn evaluate_accuracy<'a>(params: &ParameterSet, samples: impl IntoIterator<Item = &'a LabeledRaster>) -> Result<f64> {
    let (mut hits, mut n) = (0usize, 0usize);
    for s in samples {
        n += 1;
        if forward(params, &s.raster)?.dist.top_index == s.label {
            hits += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no samples to evaluate".into()));
    }
    Ok(hits as f64 / n as f64)
}
