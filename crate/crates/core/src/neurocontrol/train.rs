//! Mini-batch momentum SGD on the standardized squared error.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::{TrainingSample, N_FEATURES};
use super::mlp::{Gradients, MlpController, Normalization, Workspace};

pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("training needs at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparams(String),
    #[error("validation RMSE {achieved:.4} (fraction of target std) did not drop below {threshold} within {epochs} epochs")]
    NonConvergence { achieved: f64, threshold: f64, epochs: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    pub hidden_neurons: usize,
    pub learning_rate: f64,
    /// The step size decays geometrically from `learning_rate` to
    /// `learning_rate * final_lr_fraction` over `max_epochs`.
    pub final_lr_fraction: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without a validation improvement
    /// (0 disables early stopping).
    pub patience: usize,
    pub validation_fraction: f64,
    /// Gate on the worst per-channel validation RMSE divided by that
    /// channel's target std.
    pub rmse_threshold: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            hidden_neurons: 10,
            learning_rate: 0.02,
            final_lr_fraction: 0.01,
            momentum: 0.9,
            batch_size: 32,
            max_epochs: 500,
            patience: 0,
            validation_fraction: 0.2,
            rmse_threshold: 0.05,
            seed: 7,
        }
    }
}

impl Hyperparams {
    fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidHyperparams(m.into()));
        if self.hidden_neurons == 0 {
            return bad("hidden_neurons must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.final_lr_fraction.is_finite() && self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return bad("final_lr_fraction must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return bad("batch_size and max_epochs must be positive");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation_fraction must lie in (0, 1)");
        }
        if !(self.rmse_threshold.is_finite() && self.rmse_threshold > 0.0) {
            return bad("rmse_threshold must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Mean standardized squared error per sample and channel.
    pub train_mse: f64,
    pub validation_mse: f64,
    /// Best validation MSE seen up to and including this epoch.
    pub best_validation_mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub net: MlpController,
    pub history: Vec<EpochLoss>,
    pub best_epoch: usize,
    /// Validation RMSE per output channel as a fraction of its target std.
    pub validation_rmse: [f64; 3],
    pub train_size: usize,
    pub validation_size: usize,
}

impl TrainOutcome {
    pub fn worst_validation_rmse(&self) -> f64 {
        self.validation_rmse.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-channel RMSE divided by the network's output std.
pub fn relative_rmse(net: &MlpController, samples: &[&TrainingSample]) -> [f64; 3] {
    let mut ws = Workspace::new(net);
    let mut sse = [0.0; 3];
    for s in samples {
        net.forward_into(&s.features, &mut ws);
        let t = s.target.as_array();
        for k in 0..3 {
            let r = ws.output()[k] - t[k];
            sse[k] += r * r;
        }
    }
    let n = samples.len().max(1) as f64;
    [0, 1, 2].map(|k| (sse[k] / n).sqrt() / net.output_stats.std[k])
}

fn standardized_mse(net: &MlpController, samples: &[&TrainingSample], weights: &[f64; 3], ws: &mut Workspace) -> f64 {
    let mut total = 0.0;
    for s in samples {
        net.forward_into(&s.features, ws);
        let t = s.target.as_array();
        for k in 0..3 {
            let r = ws.output()[k] - t[k];
            total += weights[k] * r * r;
        }
    }
    total / (samples.len().max(1) * 3) as f64
}

/// Trains a 7-input, 3-output controller on `dataset`. The split, the
/// initial weights and the batch order all derive from `hp.seed`; the same
/// inputs give bit-identical weights.
pub fn train(dataset: &[TrainingSample], hp: &Hyperparams) -> Result<TrainOutcome, TrainError> {
    hp.validate()?;
    if dataset.len() < MIN_SAMPLES {
        return Err(TrainError::TooFewSamples(dataset.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((dataset.len() as f64) * hp.validation_fraction).round() as usize;
    let n_val = n_val.clamp(1, dataset.len() - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let train_set: Vec<&TrainingSample> = train_idx.iter().map(|&i| &dataset[i]).collect();
    let val_set: Vec<&TrainingSample> = val_idx.iter().map(|&i| &dataset[i]).collect();

    let mut net = MlpController::random(N_FEATURES, hp.hidden_neurons, 3, rng_seed(&mut rng));
    net.input_stats = Normalization::fit(train_set.iter().map(|s| s.features.as_slice()), N_FEATURES);
    let targets: Vec<[f64; 3]> = train_set.iter().map(|s| s.target.as_array()).collect();
    net.output_stats = Normalization::fit(targets.iter().map(|t| t.as_slice()), 3);
    let weights = channel_weights(&net.output_stats);

    let mut ws = Workspace::new(&net);
    let mut grads = Gradients::zeros_like(&net);
    let mut velocity = Gradients::zeros_like(&net);
    let mut history = Vec::with_capacity(hp.max_epochs);
    let mut best = (f64::INFINITY, 0usize, net.clone());
    let mut batch_order: Vec<usize> = (0..train_set.len()).collect();

    let span = (hp.max_epochs.max(2) - 1) as f64;
    for epoch in 1..=hp.max_epochs {
        let lr = hp.learning_rate * hp.final_lr_fraction.powf((epoch - 1) as f64 / span);
        batch_order.shuffle(&mut rng);
        for batch in batch_order.chunks(hp.batch_size) {
            grads.fill(0.0);
            for &i in batch {
                let s = train_set[i];
                net.accumulate_gradients(&s.features, &s.target.as_array(), &weights, &mut ws, &mut grads);
            }
            let scale = lr / batch.len() as f64;
            for ((p, v), g) in net.params_mut().into_iter().zip(velocity.parts_mut()).zip(grads.parts()) {
                for j in 0..p.len() {
                    v[j] = hp.momentum * v[j] - scale * g[j];
                    p[j] += v[j];
                }
            }
        }
        let train_mse = standardized_mse(&net, &train_set, &weights, &mut ws);
        let validation_mse = standardized_mse(&net, &val_set, &weights, &mut ws);
        if validation_mse < best.0 {
            best = (validation_mse, epoch, net.clone());
        }
        history.push(EpochLoss {
            epoch,
            train_mse,
            validation_mse,
            best_validation_mse: best.0,
        });
        if !train_mse.is_finite() {
            break;
        }
        if hp.patience > 0 && epoch - best.1 >= hp.patience {
            break;
        }
    }

    let (_, best_epoch, net) = best;
    let validation_rmse = relative_rmse(&net, &val_set);
    let worst = validation_rmse.iter().copied().fold(0.0, f64::max);
    if !(worst < hp.rmse_threshold) {
        return Err(TrainError::NonConvergence {
            achieved: worst,
            threshold: hp.rmse_threshold,
            epochs: history.len(),
        });
    }
    Ok(TrainOutcome {
        net,
        history,
        best_epoch,
        validation_rmse,
        train_size: train_set.len(),
        validation_size: val_set.len(),
    })
}

fn rng_seed(rng: &mut ChaCha8Rng) -> u64 {
    use rand::Rng;
    rng.next_u64()
}

/// `1/σ²` per channel, so the loss is measured on standardized targets.
fn channel_weights(stats: &Normalization) -> [f64; 3] {
    [0, 1, 2].map(|k| 1.0 / (stats.std[k] * stats.std[k]))
}
