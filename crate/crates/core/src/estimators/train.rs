//! TIDE training: Adagrad ascent on the empirical DV objective.

use serde::{Deserialize, Serialize};

use super::dv::{dv_gradient, dv_objective};
use super::network::{Activation, FeatureLayout, TideModel};
use super::sample::SampleSet;
use super::{EstimatorError, Result};
use crate::rng::SeedStream;

/// Per-parameter accumulated-squared-gradient step-size scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Adagrad,
}

/// Optional validation-based early stopping. A slice of the train split is
/// held out; training stops once its DV objective has not improved for
/// `patience` epochs (after `min_epochs`), and the best-epoch weights are
/// restored. Deterministic given the seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EarlyStop {
    pub patience: usize,
    pub min_epochs: usize,
    /// Fraction of the train split held out for validation.
    pub validation_fraction: f64,
}

impl Default for EarlyStop {
    fn default() -> Self {
        EarlyStop {
            patience: 40,
            min_epochs: 60,
            validation_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Epoch budget (exact when `early_stop` is None, maximum otherwise).
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    pub activation: Activation,
    pub early_stop: Option<EarlyStop>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 256,
            learning_rate: 0.05,
            seed: 0,
            optimizer: OptimizerKind::Adagrad,
            activation: Activation::Tanh,
            early_stop: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(EstimatorError::InvalidConfig(
                "epochs and batch size must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(EstimatorError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Objective trajectory recorded during training.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    /// Full-feature DV objective on the train split after each epoch.
    pub objective_per_epoch: Vec<f64>,
    pub final_objective: f64,
}

const ADAGRAD_EPSILON: f64 = 1e-8;

/// Trains a bounded network on the DV objective over the train split.
///
/// Each epoch shuffles the joint samples; product-of-marginals samples are
/// formed by permuting the attribute column within every batch. Models with
/// prefix masking draw one prefix length per batch uniformly from
/// {1, ..., m} so every conditioning depth is learned. Deterministic given
/// (data, layout, hidden, bound, config).
pub fn tide_train(
    data: &SampleSet,
    layout: FeatureLayout,
    hidden: &[usize],
    clip_bound: f64,
    config: &TrainConfig,
) -> Result<(TideModel, TrainReport)> {
    config.validate()?;
    let train = data.train_indices();
    if train.is_empty() {
        return Err(EstimatorError::EmptyBatch);
    }
    if data.d_x() != layout.x_dim() {
        return Err(EstimatorError::DimensionMismatch {
            expected: layout.x_dim(),
            got: data.d_x(),
        });
    }

    let mut init_stream = SeedStream::derive(config.seed, 0x1d17);
    let mut model = TideModel::new(
        data.d_s(),
        layout,
        hidden,
        clip_bound,
        config.activation,
        &mut init_stream,
    )?;
    let mut shuffle_stream = SeedStream::derive(config.seed, 0x50f1e);
    let mut accum = vec![0.0f64; model.param_count()];
    let m = layout.feature_count;

    // optional validation holdout carved deterministically from the train split
    let mut split_stream = SeedStream::derive(config.seed, 0x7a11);
    let holdout = config.early_stop.map(|es| {
        let perm = split_stream.permutation(train.len());
        let n_val = ((train.len() as f64 * es.validation_fraction).round() as usize)
            .clamp(1, train.len().saturating_sub(1));
        let val: Vec<usize> = perm[..n_val].iter().map(|&p| train[p]).collect();
        let fit: Vec<usize> = perm[n_val..].iter().map(|&p| train[p]).collect();
        (es, fit, val)
    });
    let fit_idx: Vec<usize> = match &holdout {
        Some((_, fit, _)) => fit.clone(),
        None => train.to_vec(),
    };

    // fixed pairing for the per-epoch objective log, capped so the
    // bookkeeping stays cheap relative to the gradient work
    let mut eval_stream = SeedStream::derive(config.seed, 0xe7a1);
    let eval_subset: Vec<usize> = {
        let perm = eval_stream.permutation(fit_idx.len());
        perm[..fit_idx.len().min(1024)]
            .iter()
            .map(|&p| fit_idx[p])
            .collect()
    };
    let eval_perm = eval_stream.permutation(eval_subset.len());
    let eval_joint: Vec<(usize, usize)> = eval_subset.iter().map(|&i| (i, i)).collect();
    let eval_product: Vec<(usize, usize)> = eval_perm
        .iter()
        .zip(&eval_subset)
        .map(|(&p, &i)| (eval_subset[p], i))
        .collect();

    // fixed validation pairing for early stopping
    type Pairs = Vec<(usize, usize)>;
    let val_pairs: Option<(Pairs, Pairs)> =
        holdout.as_ref().map(|(_, _, val)| {
            let perm = eval_stream.permutation(val.len());
            let joint: Vec<(usize, usize)> = val.iter().map(|&i| (i, i)).collect();
            let product: Vec<(usize, usize)> = perm
                .iter()
                .zip(val)
                .map(|(&p, &i)| (val[p], i))
                .collect();
            (joint, product)
        });

    let mut trajectory = Vec::with_capacity(config.epochs);
    let mut last_good: Option<(TideModel, f64)> = None;
    let mut order = fit_idx.clone();
    let mut best: Option<(f64, TideModel)> = None;
    let mut epochs_since_best = 0usize;
    const IMPROVEMENT_TOL: f64 = 0.0;

    for epoch in 0..config.epochs {
        shuffle_stream.shuffle(&mut order);
        for chunk in order.chunks(config.batch_size) {
            let prefix = if layout.prefix_training {
                1 + shuffle_stream.below(m)
            } else {
                m
            };
            let joint: Vec<(usize, usize)> = chunk.iter().map(|&i| (i, i)).collect();
            let perm = shuffle_stream.permutation(chunk.len());
            let product: Vec<(usize, usize)> = perm
                .iter()
                .zip(chunk)
                .map(|(&p, &i)| (chunk[p], i))
                .collect();
            let (_, grad) = dv_gradient(&model, data, &joint, &product, prefix)?;
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(diverged(epoch, last_good, &model, &trajectory));
            }
            let weights = model.weights_mut();
            for k in 0..weights.len() {
                let g = grad[k];
                accum[k] += g * g;
                weights[k] += config.learning_rate * g / (accum[k].sqrt() + ADAGRAD_EPSILON);
            }
        }
        let objective = dv_objective(&model, data, &eval_joint, &eval_product, m)?;
        if !objective.is_finite() {
            return Err(diverged(epoch, last_good, &model, &trajectory));
        }
        trajectory.push(objective);
        last_good = Some((model.clone(), objective));

        if let (Some((es, _, _)), Some((val_joint, val_product))) = (&holdout, &val_pairs) {
            let val_objective = dv_objective(&model, data, val_joint, val_product, m)?;
            if !val_objective.is_finite() {
                return Err(diverged(epoch, last_good, &model, &trajectory));
            }
            let improved = best
                .as_ref()
                .map(|(b, _)| val_objective > b + IMPROVEMENT_TOL)
                .unwrap_or(true);
            if improved {
                best = Some((val_objective, model.clone()));
                epochs_since_best = 0;
            } else {
                epochs_since_best += 1;
            }
            if epoch + 1 >= es.min_epochs && epochs_since_best >= es.patience {
                break;
            }
        }
    }
    if let Some((_, best_model)) = best {
        model = best_model;
    }

    // Recentering: the DV objective only pins g up to an additive constant.
    // Per prefix length, subtracting log E_product[e^g] maps the learned
    // function onto the density itself (the truth satisfies E_product[e^i] = 1).
    // Uses the full train split paired against a fixed permutation.
    let shift_perm = eval_stream.permutation(train.len());
    let shift_product: Vec<(usize, usize)> = shift_perm
        .iter()
        .zip(train)
        .map(|(&p, &i)| (train[p], i))
        .collect();
    let prefixes: Vec<usize> = if layout.prefix_training {
        (1..=m).collect()
    } else {
        vec![m]
    };
    let mut ws = model.workspace();
    for &prefix in &prefixes {
        let mut max = f64::NEG_INFINITY;
        let mut vals = Vec::with_capacity(shift_product.len());
        for &(si, xi) in &shift_product {
            let v = model.raw_prefix(data.s.row(si), data.x.row(xi), prefix, &mut ws)?;
            vals.push(v);
            if v > max {
                max = v;
            }
        }
        let sum_exp: f64 = vals.iter().map(|&v| (v - max).exp()).sum();
        let shift = max + (sum_exp / vals.len() as f64).ln();
        model.set_output_shift(prefix, shift);
    }

    let final_objective = *trajectory.last().expect("epochs >= 1");
    Ok((
        model,
        TrainReport {
            objective_per_epoch: trajectory,
            final_objective,
        },
    ))
}

fn diverged(
    epoch: usize,
    last_good: Option<(TideModel, f64)>,
    current: &TideModel,
    _trajectory: &[f64],
) -> EstimatorError {
    let checkpoint = last_good.map(|(m, _)| m).unwrap_or_else(|| current.clone());
    EstimatorError::TrainingDiverged {
        epoch,
        checkpoint: Box::new(checkpoint),
    }
}
