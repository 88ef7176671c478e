use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::loss::accumulate_batch;
use super::{adam_step, AdamConfig, AdamState, ForwardCache, LossKind, Network, NetworkSpec, NetworkState};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default)]
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub loss: LossKind,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(loss: LossKind, epochs: usize, batch_size: usize, seed: u64) -> Self {
        Self {
            adam: AdamConfig::default(),
            batch_size,
            epochs,
            loss,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Argument("batch_size must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Argument("epochs must be at least 1".into()));
        }
        self.adam.validate()
    }
}

/// Final network plus the mean training loss of every epoch.
#[derive(Debug, Clone)]
pub struct TrainedNetwork {
    pub network: Network,
    pub loss_history: Vec<f64>,
}

/// Corrupts an input before it is presented; targets stay clean.
pub type Corruption<'a> = &'a dyn Fn(&[f64], &mut Rng) -> Vec<f64>;

pub fn train(
    spec: &NetworkSpec,
    inputs: &[&[f64]],
    targets: &[&[f64]],
    cfg: &TrainConfig,
) -> Result<TrainedNetwork> {
    train_with(spec, inputs, targets, cfg, None)
}

/// Seeded Glorot initialization, then per epoch a seeded shuffle and
/// sequential mini-batches (the final short batch is kept), one Adam step
/// per batch.
pub fn train_with(
    spec: &NetworkSpec,
    inputs: &[&[f64]],
    targets: &[&[f64]],
    cfg: &TrainConfig,
    corruption: Option<Corruption<'_>>,
) -> Result<TrainedNetwork> {
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(Error::Argument("no training data".into()));
    }
    if inputs.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} inputs but {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    if let Some(x) = inputs.iter().find(|x| x.len() != spec.input_width()) {
        return Err(Error::Shape(format!(
            "training input of width {} for a network of width {}",
            x.len(),
            spec.input_width()
        )));
    }

    let mut net = Network::init(spec.clone(), cfg.seed);
    let mut opt = AdamState::new(spec);
    let mut grads = NetworkState::zeros(spec);
    let mut cache = ForwardCache::default();
    let mut shuffle_rng = rng::stream(cfg.seed, &[0x5417]);
    let mut noise_rng = rng::stream(cfg.seed, &[0x0153]);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut noisy: Vec<Vec<f64>> = Vec::new();
    let mut t = 0u64;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.fill(0.0);
            let batch_targets: Vec<&[f64]> = batch.iter().map(|&i| targets[i]).collect();
            let data_loss = match corruption {
                Some(corrupt) => {
                    noisy.clear();
                    noisy.extend(batch.iter().map(|&i| corrupt(inputs[i], &mut noise_rng)));
                    let xs: Vec<&[f64]> = noisy.iter().map(Vec::as_slice).collect();
                    accumulate_batch(&net, &xs, &batch_targets, cfg.loss, &mut cache, &mut grads)?
                }
                None => {
                    let xs: Vec<&[f64]> = batch.iter().map(|&i| inputs[i]).collect();
                    accumulate_batch(&net, &xs, &batch_targets, cfg.loss, &mut cache, &mut grads)?
                }
            };
            let b = batch.len() as f64;
            let batch_loss = data_loss / b + net.l1_penalty();
            if !batch_loss.is_finite() {
                return Err(Error::Divergence { epoch: epoch + 1 });
            }
            epoch_loss += batch_loss * b;
            grads.scale(1.0 / b);
            net.add_l1_gradient(&mut grads);
            t += 1;
            adam_step(net.state_mut(), &grads, &mut opt, t, &cfg.adam)?;
        }
        if !net.state().is_finite() {
            return Err(Error::Divergence { epoch: epoch + 1 });
        }
        history.push(epoch_loss / inputs.len() as f64);
    }
    Ok(TrainedNetwork {
        network: net,
        loss_history: history,
    })
}
