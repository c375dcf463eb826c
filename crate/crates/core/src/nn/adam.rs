//! Adam optimizer over [`ModelParams`]-shaped tensors.

use super::model::ModelParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Adam hyperparameters (defaults: lr 0.001, beta1 0.9, beta2 0.999,
/// epsilon 1e-8).
#[derive(Clone, Copy, Debug)]
pub struct AdamConfig<T: Real> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Real> AdamConfig<T> {
    pub fn with_learning_rate(learning_rate: T) -> Self {
        AdamConfig {
            learning_rate,
            beta1: T::from_f64_lossy(0.9),
            beta2: T::from_f64_lossy(0.999),
            epsilon: T::from_f64_lossy(1e-8),
        }
    }
}

impl<T: Real> Default for AdamConfig<T> {
    fn default() -> Self {
        Self::with_learning_rate(T::from_f64_lossy(0.001))
    }
}

/// First/second-moment accumulators shaped like the model, plus the step
/// counter and hyperparameters.
#[derive(Clone, Debug)]
pub struct AdamState<T: Real> {
    pub m: ModelParams<T>,
    pub v: ModelParams<T>,
    pub step: u64,
    pub config: AdamConfig<T>,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &ModelParams<T>, config: AdamConfig<T>) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
            config,
        }
    }
}

/// One bias-corrected Adam update; increments the step counter.
pub fn adam_step<T: Real>(params: &mut ModelParams<T>, grads: &ModelParams<T>, state: &mut AdamState<T>) -> Result<()> {
    state.step += 1;
    let c = state.config;
    let one = T::one();
    let t = state.step as i32;
    let bias1 = one - c.beta1.powi(t);
    let bias2 = one - c.beta2.powi(t);

    let p_tensors = params.tensors_mut();
    let g_tensors = grads.tensors();
    let m_tensors = state.m.tensors_mut();
    let v_tensors = state.v.tensors_mut();
    if p_tensors.len() != g_tensors.len() {
        return Err(Error::argument("gradient tensors do not match parameter tensors"));
    }

    for (((p, g), m), v) in p_tensors.into_iter().zip(g_tensors).zip(m_tensors).zip(v_tensors) {
        if p.len() != g.len() {
            return Err(Error::argument("gradient tensor shape mismatch"));
        }
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = c.beta1 * m[i] + (one - c.beta1) * gi;
            v[i] = c.beta2 * v[i] + (one - c.beta2) * gi * gi;
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            p[i] -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
        }
    }
    Ok(())
}
