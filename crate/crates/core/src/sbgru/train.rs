//! Window-sampled training loop for the sliding estimator.
//!
//! Each step draws a batch of (sequence, window start) pairs, forwards the
//! window, scores it with the MSE objective against the true channel, and
//! applies one Adam update with the batch-mean gradient. Observation noise is
//! regenerated freshly every epoch at the training SNR; validation noise and
//! validation windows are fixed across epochs so epoch losses are comparable.
//!
//! Per-sample gradients are computed in parallel over fixed-size chunks and
//! reduced in index order, so results are bitwise independent of the thread
//! count. All sampling comes from streams derived from `TrainConfig::seed`.

use rayon::prelude::*;

use super::SlidingConfig;
use crate::channel::{apply_channel, NoiseSpec};
use crate::dataset::Split;
use crate::error::{Error, Result};
use crate::framing::{to_features, FeatureMatrix};
use crate::nn::{adam_step, model_loss, model_loss_and_grads, AdamConfig, AdamState, Mat, ModelParams};
use crate::rng::{derive_seed, domains, SeedStream};
use crate::scalar::Real;

/// Gradient chunk size for the deterministic batch reduction.
const GRAD_CHUNK: usize = 16;

/// Training hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct TrainConfig<T: Real> {
    pub learning_rate: T,
    pub batch_size: usize,
    pub train_snr_db: T,
    pub epochs: usize,
    pub seed: u64,
}

impl<T: Real> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > T::zero()) {
            return Err(Error::argument("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::argument("batch size must be positive"));
        }
        Ok(())
    }
}

/// One epoch's logged losses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainLogEntry {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome<T: Real> {
    /// Parameters with the best validation loss (the initial parameters when
    /// `epochs` = 0).
    pub model: ModelParams<T>,
    pub log: Vec<TrainLogEntry>,
    pub best_epoch: Option<usize>,
}

struct PreparedSequence<T: Real> {
    features: FeatureMatrix<T>,
    channel_index: u32,
}

/// Builds noisy observations and features for every sequence of a split.
fn prepare_features<T: Real>(
    split: &Split<T>,
    noise: &NoiseSpec<T>,
    noise_seed_base: u64,
) -> Result<Vec<PreparedSequence<T>>> {
    split
        .sequences
        .records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let h = split.channel_of(rec);
            let y = apply_channel(&rec.symbols, h, noise, derive_seed(noise_seed_base, 0, i as u64))?;
            Ok(PreparedSequence {
                features: to_features(&y, &rec.pilot_ref)?,
                channel_index: rec.channel_index,
            })
        })
        .collect()
}

fn window_input<T: Real>(features: &FeatureMatrix<T>, start: usize, len: usize) -> Mat<T> {
    let mut w = Mat::zeros(len, FeatureMatrix::<T>::ROWS);
    for t in 0..len {
        features.col_into(start + t, w.row_mut(t));
    }
    w
}

/// Trains `model` on window samples; see the module docs for the protocol.
pub fn train<T: Real>(
    model: ModelParams<T>,
    train_split: &Split<T>,
    val_split: &Split<T>,
    sliding: &SlidingConfig,
    cfg: &TrainConfig<T>,
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    model.check_shapes()?;
    train_split.validate()?;
    val_split.validate()?;
    if train_split.sequences.records.is_empty() || val_split.sequences.records.is_empty() {
        return Err(Error::argument("training and validation splits must be nonempty"));
    }
    let len = train_split.sequences.layout.total_length();
    if sliding.sequence_length() != len || val_split.sequences.layout.total_length() != len {
        return Err(Error::argument("sliding config does not match dataset sequence length"));
    }
    let w = sliding.window_length();
    let noise = NoiseSpec::from_snr_db(cfg.train_snr_db);
    let n_train = train_split.sequences.records.len();
    let n_val = val_split.sequences.records.len();

    // Fixed validation windows and observations.
    let val_features = prepare_features(val_split, &noise, derive_seed(cfg.seed, domains::VAL_NOISE, 0))?;
    let mut val_stream = SeedStream::from_seed(derive_seed(cfg.seed, domains::VAL_WINDOWS, 0));
    let val_windows: Vec<usize> = (0..n_val)
        .map(|_| val_stream.below((len - w + 1) as u64) as usize)
        .collect();

    let val_loss_of = |m: &ModelParams<T>| -> Result<f64> {
        let losses: Vec<f64> = val_split
            .sequences
            .records
            .par_iter()
            .enumerate()
            .map(|(i, _)| {
                let prep = &val_features[i];
                let start = val_windows[i];
                let input = window_input(&prep.features, start, w);
                let truth = &val_split.channels[prep.channel_index as usize].gains[start..start + w];
                Ok(model_loss(m, &input, truth)?.to_f64_lossy())
            })
            .collect::<Result<_>>()?;
        Ok(losses.iter().sum::<f64>() / n_val as f64)
    };

    let mut model = model;
    let mut state = AdamState::new(&model, AdamConfig::with_learning_rate(cfg.learning_rate));
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, ModelParams<T>, usize)> = None;

    for epoch in 1..=cfg.epochs {
        let features = prepare_features(
            train_split,
            &noise,
            derive_seed(cfg.seed, domains::TRAIN_NOISE, epoch as u64),
        )?;

        // Seeded epoch order and window starts.
        let mut sampler = SeedStream::from_seed(derive_seed(cfg.seed, domains::BATCH_SAMPLING, epoch as u64));
        let mut order: Vec<usize> = (0..n_train).collect();
        sampler.shuffle(&mut order);
        let pairs: Vec<(usize, usize)> = order
            .into_iter()
            .map(|idx| (idx, sampler.below((len - w + 1) as u64) as usize))
            .collect();

        let mut epoch_loss_sum = 0.0f64;
        for (batch_no, batch) in pairs.chunks(cfg.batch_size).enumerate() {
            let chunk_results: Vec<(f64, ModelParams<T>)> = batch
                .par_chunks(GRAD_CHUNK)
                .map(|chunk| {
                    let mut grads = model.zeros_like();
                    let mut loss_sum = 0.0f64;
                    for &(idx, start) in chunk {
                        let prep = &features[idx];
                        let input = window_input(&prep.features, start, w);
                        let truth =
                            &train_split.channels[prep.channel_index as usize].gains[start..start + w];
                        let loss = model_loss_and_grads(&model, &input, truth, &mut grads)?;
                        loss_sum += loss.to_f64_lossy();
                    }
                    Ok((loss_sum, grads))
                })
                .collect::<Result<_>>()?;

            let mut grads = model.zeros_like();
            let mut batch_loss = 0.0f64;
            for (loss_sum, g) in &chunk_results {
                batch_loss += loss_sum;
                grads.add_assign(g);
            }
            grads.scale(T::one() / T::from_f64_lossy(batch.len() as f64));
            let mean_loss = batch_loss / batch.len() as f64;
            if !mean_loss.is_finite() {
                return Err(Error::numerical(format!(
                    "non-finite training loss {mean_loss} at epoch {epoch}, batch {batch_no}"
                )));
            }
            epoch_loss_sum += batch_loss;
            adam_step(&mut model, &grads, &mut state)?;
        }

        let train_loss = epoch_loss_sum / n_train as f64;
        let val_loss = val_loss_of(&model)?;
        if !val_loss.is_finite() {
            return Err(Error::numerical(format!("non-finite validation loss at epoch {epoch}")));
        }
        log.push(TrainLogEntry {
            epoch,
            train_loss,
            val_loss,
        });
        if best.as_ref().map_or(true, |(b, _, _)| val_loss < *b) {
            best = Some((val_loss, model.clone(), epoch));
        }
    }

    let (model, best_epoch) = match best {
        Some((_, m, e)) => (m, Some(e)),
        None => (model, None),
    };
    Ok(TrainOutcome {
        model,
        log,
        best_epoch,
    })
}
