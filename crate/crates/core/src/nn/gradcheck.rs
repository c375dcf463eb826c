//! Finite-difference validation of the end-to-end analytic gradients.

use num_complex::Complex;

use super::mat::Mat;
use super::model::{model_loss, model_loss_and_grads, ModelParams};
use crate::error::Result;
use crate::scalar::Real;

/// Compares the analytic gradient of the window loss against central finite
/// differences over every parameter and returns the maximum relative error
/// `|a - n| / max(|a| + |n|, 1e-3)`.
///
/// Intended for f64 models and short windows; `step` around 1e-5 keeps the
/// truncation and rounding errors of the differences near 1e-10.
pub fn grad_check<T: Real>(model: &ModelParams<T>, x: &Mat<T>, truth: &[Complex<T>], step: T) -> Result<T> {
    let mut grads = model.zeros_like();
    model_loss_and_grads(model, x, truth, &mut grads)?;

    let floor = T::from_f64_lossy(1e-3);
    let two = T::from_f64_lossy(2.0);
    let mut worst = T::zero();
    let mut probe = model.clone();
    let n = model.param_count();
    for idx in 0..n {
        let orig = probe.flat_get(idx);
        probe.flat_set(idx, orig + step);
        let up = model_loss(&probe, x, truth)?;
        probe.flat_set(idx, orig - step);
        let down = model_loss(&probe, x, truth)?;
        probe.flat_set(idx, orig);

        let numeric = (up - down) / (two * step);
        let analytic = grads.flat_get(idx);
        let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(floor);
        if rel > worst {
            worst = rel;
        }
    }
    Ok(worst)
}
