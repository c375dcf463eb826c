//! The sliding bidirectional GRU estimator: stride-1 window scheduling with
//! per-position averaging over every covering window, plus the block-wise
//! (non-sliding) evaluation mode.

mod eval;
mod train;

pub use eval::{evaluate, evaluate_custom, trace_export, TraceSummary, ESTIMATOR_NAMES};
pub use train::{train, TrainConfig, TrainLogEntry, TrainOutcome};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::framing::FeatureMatrix;
use crate::nn::{bgru_infer, head_output_to_complex, linear_head, Mat, ModelParams};
use crate::scalar::Real;

/// Sliding-window geometry. The stride is fixed at one symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlidingConfig {
    window_length: usize,
    sequence_length: usize,
}

impl SlidingConfig {
    pub fn new(window_length: usize, sequence_length: usize) -> Result<Self> {
        if window_length == 0 {
            return Err(Error::argument("window length must be positive"));
        }
        if window_length > sequence_length {
            return Err(Error::argument(format!(
                "window length {window_length} exceeds sequence length {sequence_length}"
            )));
        }
        Ok(SlidingConfig {
            window_length,
            sequence_length,
        })
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn sequence_length(&self) -> usize {
        self.sequence_length
    }

    /// Number of scheduled windows, `L - W + 1`.
    pub fn window_count(&self) -> usize {
        self.sequence_length - self.window_length + 1
    }
}

/// Start positions of every scheduled window covering position `t`:
/// `max(0, t - W + 1) ..= min(t, L - W)`. Starts are clipped so each window
/// fits entirely inside the sequence.
pub fn window_starts(t: usize, cfg: &SlidingConfig) -> Result<std::ops::RangeInclusive<usize>> {
    if t >= cfg.sequence_length {
        return Err(Error::argument(format!(
            "position {t} outside sequence of length {}",
            cfg.sequence_length
        )));
    }
    let lo = t.saturating_sub(cfg.window_length - 1);
    let hi = t.min(cfg.sequence_length - cfg.window_length);
    Ok(lo..=hi)
}

/// Copies feature columns `[start, start+len)` into a time-major window
/// matrix (`len x 4`).
fn feature_window<T: Real>(x: &FeatureMatrix<T>, start: usize, len: usize) -> Mat<T> {
    let mut w = Mat::zeros(len, FeatureMatrix::<T>::ROWS);
    for t in 0..len {
        x.col_into(start + t, w.row_mut(t));
    }
    w
}

fn infer_window<T: Real>(x: &FeatureMatrix<T>, start: usize, len: usize, model: &ModelParams<T>) -> Result<Vec<Complex<T>>> {
    let win = feature_window(x, start, len);
    let h = bgru_infer(&win, model)?;
    let pred = linear_head(&h, &model.head)?;
    Ok(head_output_to_complex(&pred))
}

/// Slides a length-W window one symbol at a time over the sequence, runs the
/// network on every window, and averages each position's estimates over all
/// windows covering it.
pub fn sliding_estimate<T: Real>(
    x: &FeatureMatrix<T>,
    model: &ModelParams<T>,
    cfg: &SlidingConfig,
) -> Result<Vec<Complex<T>>> {
    let len = cfg.sequence_length;
    if x.cols() != len {
        return Err(Error::argument(format!(
            "feature length {} does not match configured sequence length {len}",
            x.cols()
        )));
    }
    let w = cfg.window_length;
    let zero = Complex::new(T::zero(), T::zero());
    let mut sums = vec![zero; len];
    let mut counts = vec![0u32; len];
    for start in 0..cfg.window_count() {
        let est = infer_window(x, start, w, model)?;
        for (k, e) in est.into_iter().enumerate() {
            sums[start + k] += e;
            counts[start + k] += 1;
        }
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| s.unscale(T::from_f64_lossy(c as f64)))
        .collect())
}

/// Non-sliding baseline: partitions the sequence into disjoint
/// `block`-length segments, runs the network independently on each, and
/// concatenates the estimates.
pub fn block_estimate<T: Real>(x: &FeatureMatrix<T>, model: &ModelParams<T>, block: usize) -> Result<Vec<Complex<T>>> {
    let len = x.cols();
    if block == 0 || len % block != 0 {
        return Err(Error::argument(format!(
            "block length {block} must divide sequence length {len}"
        )));
    }
    let mut out = Vec::with_capacity(len);
    for start in (0..len).step_by(block) {
        out.extend(infer_window(x, start, block, model)?);
    }
    Ok(out)
}
