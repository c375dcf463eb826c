//! Stacked bidirectional GRU with a linear output head, its full reverse-mode
//! pass, and the MSE training objective.

use num_complex::Complex;

use super::gru::{gru_dir_backward, gru_dir_forward, GruDirParams, GruSeqCache};
use super::mat::{axpy, dot, Mat};
use crate::error::{Error, Result};
use crate::rng::SeedStream;
use crate::scalar::Real;

/// Forward + backward parameters of one bidirectional layer.
#[derive(Clone, Debug, PartialEq)]
pub struct BiGruLayerParams<T: Real> {
    pub fwd: GruDirParams<T>,
    pub bwd: GruDirParams<T>,
}

/// Affine output head mapping concatenated hidden states to
/// `(re hhat, im hhat)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadParams<T: Real> {
    /// `2 x (2 * hidden)`
    pub w: Mat<T>,
    pub b: Vec<T>,
}

/// All learnable parameters of the estimator network.
///
/// Layer 0 consumes the 4-row feature input; every later layer consumes the
/// `2 * hidden` concatenated states of the previous layer; the head consumes
/// the last layer's concatenation.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T: Real> {
    pub layers: Vec<BiGruLayerParams<T>>,
    pub head: HeadParams<T>,
    pub version: u32,
}

pub const MODEL_VERSION: u32 = 1;

/// Head output dimension (real and imaginary channel rows).
pub const HEAD_OUTPUT: usize = 2;

impl<T: Real> ModelParams<T> {
    /// All-zero parameters with the given shape.
    pub fn zeros(input_size: usize, hidden_size: usize, n_layers: usize) -> Self {
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let in_l = if l == 0 { input_size } else { 2 * hidden_size };
            layers.push(BiGruLayerParams {
                fwd: GruDirParams::zeros(in_l, hidden_size),
                bwd: GruDirParams::zeros(in_l, hidden_size),
            });
        }
        ModelParams {
            layers,
            head: HeadParams {
                w: Mat::zeros(HEAD_OUTPUT, 2 * hidden_size),
                b: vec![T::zero(); HEAD_OUTPUT],
            },
            version: MODEL_VERSION,
        }
    }

    /// Seeded initialization: every weight and bias uniform on
    /// `(-1/sqrt(hidden), +1/sqrt(hidden))`, drawn tensor by tensor in the
    /// canonical order of [`ModelParams::tensors`].
    pub fn init(input_size: usize, hidden_size: usize, n_layers: usize, seed: u64) -> Self {
        let mut model = Self::zeros(input_size, hidden_size, n_layers);
        let scale = 1.0 / (hidden_size as f64).sqrt();
        let mut stream = SeedStream::from_seed(seed);
        for tensor in model.tensors_mut() {
            for v in tensor {
                *v = T::from_f64_lossy(stream.uniform_in(-scale, scale));
            }
        }
        model
    }

    pub fn hidden_size(&self) -> usize {
        self.layers[0].fwd.hidden_size()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].fwd.input_size()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Validates the shape chain between layers and head.
    pub fn check_shapes(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::argument("model needs at least one layer"));
        }
        let hidden = self.hidden_size();
        for (l, layer) in self.layers.iter().enumerate() {
            layer.fwd.check_shapes()?;
            layer.bwd.check_shapes()?;
            for dir in [&layer.fwd, &layer.bwd] {
                if dir.hidden_size() != hidden {
                    return Err(Error::argument(format!("layer {l}: hidden size mismatch")));
                }
                let expect_in = if l == 0 { self.input_size() } else { 2 * hidden };
                if dir.input_size() != expect_in {
                    return Err(Error::argument(format!(
                        "layer {l}: input size {} should be {expect_in}",
                        dir.input_size()
                    )));
                }
            }
        }
        if self.head.w.rows() != HEAD_OUTPUT || self.head.w.cols() != 2 * hidden || self.head.b.len() != HEAD_OUTPUT {
            return Err(Error::argument("head shape mismatch"));
        }
        Ok(())
    }

    /// Same shapes, zero values (gradient / moment container).
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            for v in t {
                *v = T::zero();
            }
        }
        z
    }

    /// Tensors in canonical order: per layer (forward then backward
    /// direction) w_z, b_z, w_r, b_r, w_c, b_c; then head w, b. This order
    /// defines the checkpoint layout and the flat parameter indexing.
    pub fn tensors(&self) -> Vec<&[T]> {
        let mut out = Vec::with_capacity(self.layers.len() * 12 + 2);
        for layer in &self.layers {
            for dir in [&layer.fwd, &layer.bwd] {
                out.push(dir.w_z.data());
                out.push(dir.b_z.as_slice());
                out.push(dir.w_r.data());
                out.push(dir.b_r.as_slice());
                out.push(dir.w_c.data());
                out.push(dir.b_c.as_slice());
            }
        }
        out.push(self.head.w.data());
        out.push(self.head.b.as_slice());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::with_capacity(self.layers.len() * 12 + 2);
        for layer in &mut self.layers {
            for dir in [&mut layer.fwd, &mut layer.bwd] {
                out.push(dir.w_z.data_mut());
                out.push(dir.b_z.as_mut_slice());
                out.push(dir.w_r.data_mut());
                out.push(dir.b_r.as_mut_slice());
                out.push(dir.w_c.data_mut());
                out.push(dir.b_c.as_mut_slice());
            }
        }
        out.push(self.head.w.data_mut());
        out.push(self.head.b.as_mut_slice());
        out
    }

    /// Shape descriptors in tensor order: (rank, dims).
    pub fn tensor_shapes(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for dir in [&layer.fwd, &layer.bwd] {
                out.push(vec![dir.w_z.rows(), dir.w_z.cols()]);
                out.push(vec![dir.b_z.len()]);
                out.push(vec![dir.w_r.rows(), dir.w_r.cols()]);
                out.push(vec![dir.b_r.len()]);
                out.push(vec![dir.w_c.rows(), dir.w_c.cols()]);
                out.push(vec![dir.b_c.len()]);
            }
        }
        out.push(vec![self.head.w.rows(), self.head.w.cols()]);
        out.push(vec![self.head.b.len()]);
        out
    }

    /// Total learnable parameter count. For the default configuration
    /// (input 4, hidden 40, 2 bidirectional layers, head 2) this is
    /// 2*3*(40*44+40) + 2*3*(40*120+40) + 2*80+2 = 40002.
    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn flat_get(&self, mut idx: usize) -> T {
        for t in self.tensors() {
            if idx < t.len() {
                return t[idx];
            }
            idx -= t.len();
        }
        panic!("flat index out of range");
    }

    pub fn flat_set(&mut self, mut idx: usize, v: T) {
        for t in self.tensors_mut() {
            if idx < t.len() {
                t[idx] = v;
                return;
            }
            idx -= t.len();
        }
        panic!("flat index out of range");
    }

    /// `self += other` over every tensor.
    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
    }

    /// Scales every tensor.
    pub fn scale(&mut self, s: T) {
        for t in self.tensors_mut() {
            for v in t {
                *v *= s;
            }
        }
    }
}

/// Per-layer caches of one bidirectional forward pass.
pub struct BgruCache<T: Real> {
    dir_caches: Vec<(GruSeqCache<T>, GruSeqCache<T>)>,
}

fn concat_directions<T: Real>(hf: &Mat<T>, hb: &Mat<T>) -> Mat<T> {
    let steps = hf.rows();
    let hidden = hf.cols();
    let mut out = Mat::zeros(steps, 2 * hidden);
    for t in 0..steps {
        out.row_mut(t)[..hidden].copy_from_slice(hf.row(t));
        out.row_mut(t)[hidden..].copy_from_slice(hb.row(t));
    }
    out
}

fn bgru_run<T: Real>(
    x: &Mat<T>,
    params: &ModelParams<T>,
    want_cache: bool,
) -> Result<(Mat<T>, Option<BgruCache<T>>)> {
    if x.rows() == 0 {
        return Err(Error::argument("input window must have at least one step"));
    }
    if x.cols() != params.input_size() {
        return Err(Error::argument(format!(
            "input width {} does not match model input size {}",
            x.cols(),
            params.input_size()
        )));
    }
    let mut caches = want_cache.then(Vec::new);
    let mut current = x.clone();
    for layer in &params.layers {
        let (hf, cf) = gru_dir_forward(&current, false, &layer.fwd, want_cache);
        let (hb, cb) = gru_dir_forward(&current, true, &layer.bwd, want_cache);
        current = concat_directions(&hf, &hb);
        if let Some(c) = caches.as_mut() {
            c.push((cf.expect("cache requested"), cb.expect("cache requested")));
        }
    }
    Ok((current, caches.map(|dir_caches| BgruCache { dir_caches })))
}

/// Bidirectional forward pass over a window (time-major input, one column
/// set per feature row). Returns the last layer's concatenated states
/// (`T x 2*hidden`) and the caches for [`bgru_backward`].
pub fn bgru_forward<T: Real>(x: &Mat<T>, params: &ModelParams<T>) -> Result<(Mat<T>, BgruCache<T>)> {
    let (h, cache) = bgru_run(x, params, true)?;
    Ok((h, cache.expect("cache requested")))
}

/// Forward pass without retaining caches (inference).
pub fn bgru_infer<T: Real>(x: &Mat<T>, params: &ModelParams<T>) -> Result<Mat<T>> {
    Ok(bgru_run(x, params, false)?.0)
}

/// Full reverse-mode pass through every layer. Parameter gradients
/// accumulate into `grads`; returns dL/dinput.
pub fn bgru_backward<T: Real>(
    grad_out: &Mat<T>,
    cache: &BgruCache<T>,
    params: &ModelParams<T>,
    grads: &mut ModelParams<T>,
) -> Mat<T> {
    let hidden = params.hidden_size();
    let steps = grad_out.rows();
    let mut grad = grad_out.clone();
    for (l, layer) in params.layers.iter().enumerate().rev() {
        let (cache_f, cache_b) = &cache.dir_caches[l];
        let mut gf = Mat::zeros(steps, hidden);
        let mut gb = Mat::zeros(steps, hidden);
        for t in 0..steps {
            gf.row_mut(t).copy_from_slice(&grad.row(t)[..hidden]);
            gb.row_mut(t).copy_from_slice(&grad.row(t)[hidden..]);
        }
        let glayers = &mut grads.layers[l];
        let gin_f = gru_dir_backward(&gf, cache_f, false, &layer.fwd, &mut glayers.fwd);
        let gin_b = gru_dir_backward(&gb, cache_b, true, &layer.bwd, &mut glayers.bwd);
        let mut gin = gin_f;
        for t in 0..steps {
            for (a, b) in gin.row_mut(t).iter_mut().zip(gin_b.row(t)) {
                *a += *b;
            }
        }
        grad = gin;
    }
    grad
}

/// Affine head applied per time step: output row t is `W h_t + b`.
pub fn linear_head<T: Real>(h: &Mat<T>, head: &HeadParams<T>) -> Result<Mat<T>> {
    if h.cols() != head.w.cols() {
        return Err(Error::argument(format!(
            "hidden width {} does not match head input {}",
            h.cols(),
            head.w.cols()
        )));
    }
    let steps = h.rows();
    let mut out = Mat::zeros(steps, HEAD_OUTPUT);
    for t in 0..steps {
        for i in 0..HEAD_OUTPUT {
            out.set(t, i, dot(head.w.row(i), h.row(t)) + head.b[i]);
        }
    }
    Ok(out)
}

/// Reverse-mode pass of the head; accumulates into `grads`, returns dL/dh.
pub fn linear_head_backward<T: Real>(
    grad_out: &Mat<T>,
    h: &Mat<T>,
    head: &HeadParams<T>,
    grads: &mut HeadParams<T>,
) -> Mat<T> {
    let steps = h.rows();
    let mut grad_h = Mat::zeros(steps, h.cols());
    for t in 0..steps {
        for i in 0..HEAD_OUTPUT {
            let g = grad_out.at(t, i);
            grads.b[i] += g;
            axpy(g, h.row(t), grads.w.row_mut(i));
            axpy(g, head.w.row(i), grad_h.row_mut(t));
        }
    }
    grad_h
}

/// Mean-squared-error objective against a complex truth sequence:
/// `loss = (1/T) sum_t (pred_re - re h_t)^2 + (pred_im - im h_t)^2`,
/// `grad = (2/T) (pred - truth)`.
pub fn mse_loss_and_grad<T: Real>(pred: &Mat<T>, truth: &[Complex<T>]) -> Result<(T, Mat<T>)> {
    if pred.rows() != truth.len() {
        return Err(Error::argument(format!(
            "prediction steps {} do not match truth length {}",
            pred.rows(),
            truth.len()
        )));
    }
    if pred.rows() == 0 {
        return Err(Error::argument("empty prediction"));
    }
    let steps = pred.rows();
    let inv = T::one() / T::from_f64_lossy(steps as f64);
    let two = T::from_f64_lossy(2.0);
    let mut loss = T::zero();
    let mut grad = Mat::zeros(steps, HEAD_OUTPUT);
    for t in 0..steps {
        let dr = pred.at(t, 0) - truth[t].re;
        let di = pred.at(t, 1) - truth[t].im;
        loss += (dr * dr + di * di) * inv;
        grad.set(t, 0, two * inv * dr);
        grad.set(t, 1, two * inv * di);
    }
    Ok((loss, grad))
}

/// End-to-end loss of the model on one window (no gradients).
pub fn model_loss<T: Real>(params: &ModelParams<T>, x: &Mat<T>, truth: &[Complex<T>]) -> Result<T> {
    let h = bgru_infer(x, params)?;
    let pred = linear_head(&h, &params.head)?;
    Ok(mse_loss_and_grad(&pred, truth)?.0)
}

/// End-to-end loss and parameter gradients of one window, accumulated into
/// `grads` (callers average over a batch by scaling afterwards).
pub fn model_loss_and_grads<T: Real>(
    params: &ModelParams<T>,
    x: &Mat<T>,
    truth: &[Complex<T>],
    grads: &mut ModelParams<T>,
) -> Result<T> {
    let (h, cache) = bgru_forward(x, params)?;
    let pred = linear_head(&h, &params.head)?;
    let (loss, grad_pred) = mse_loss_and_grad(&pred, truth)?;
    let grad_h = linear_head_backward(&grad_pred, &h, &params.head, &mut grads.head);
    bgru_backward(&grad_h, &cache, params, grads);
    Ok(loss)
}

/// Complex estimate from the head output rows.
pub fn head_output_to_complex<T: Real>(pred: &Mat<T>) -> Vec<Complex<T>> {
    (0..pred.rows()).map(|t| Complex::new(pred.at(t, 0), pred.at(t, 1))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_configuration_parameter_count() {
        let m = ModelParams::<f64>::zeros(4, 40, 2);
        // 2 directions * 3 gates * (40*(40+4) + 40)   = 10800   (layer 0)
        // 2 directions * 3 gates * (40*(40+80) + 40)  = 29040   (layer 1)
        // head: 2*(2*40) + 2                          =   162
        assert_eq!(m.param_count(), 40002);
        m.check_shapes().unwrap();
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = ModelParams::<f64>::init(4, 8, 2, 7);
        let b = ModelParams::<f64>::init(4, 8, 2, 7);
        assert_eq!(a, b);
        let c = ModelParams::<f64>::init(4, 8, 2, 8);
        assert_ne!(a, c);
        let bound = 1.0 / (8.0f64).sqrt();
        for t in a.tensors() {
            for v in t {
                assert!(v.abs() < bound);
            }
        }
    }

    #[test]
    fn single_step_window_concatenates_two_cells() {
        let m = ModelParams::<f64>::init(4, 3, 1, 42);
        let x = Mat::from_vec(1, 4, vec![0.3, -0.2, 0.9, 0.1]);
        let (h, _) = bgru_forward(&x, &m).unwrap();
        assert_eq!(h.rows(), 1);
        assert_eq!(h.cols(), 6);
        let (hf, _) = super::super::gru::gru_cell_forward(x.row(0), &[0.0; 3], &m.layers[0].fwd).unwrap();
        let (hb, _) = super::super::gru::gru_cell_forward(x.row(0), &[0.0; 3], &m.layers[0].bwd).unwrap();
        assert_eq!(&h.row(0)[..3], hf.as_slice());
        assert_eq!(&h.row(0)[3..], hb.as_slice());
    }

    /// Swapping direction parameters (and, in stacked layers, the two
    /// concatenation halves of the next layer's input columns) turns a
    /// time-reversed input into the time-reversed, half-swapped output.
    #[test]
    fn bidirectional_structural_symmetry() {
        let hidden = 3;
        let m = ModelParams::<f64>::init(4, hidden, 2, 99);

        let mut mirrored = m.clone();
        for l in 0..mirrored.layers.len() {
            let layer = &mut mirrored.layers[l];
            std::mem::swap(&mut layer.fwd, &mut layer.bwd);
            if l > 0 {
                // Layer 1 consumes [fwd0, bwd0]; in the mirrored model the
                // halves arrive swapped, so swap the matching input columns
                // (the x-part occupies columns hidden..hidden+2*hidden).
                for dir in [&mut layer.fwd, &mut layer.bwd] {
                    for w in [&mut dir.w_z, &mut dir.w_r, &mut dir.w_c] {
                        for row in 0..w.rows() {
                            for c in 0..hidden {
                                let a = hidden + c;
                                let b = hidden + hidden + c;
                                let (va, vb) = (w.at(row, a), w.at(row, b));
                                w.set(row, a, vb);
                                w.set(row, b, va);
                            }
                        }
                    }
                }
            }
        }

        let steps = 5;
        let x = Mat::from_fn(steps, 4, |i, j| ((i * 4 + j) as f64 * 0.31).cos());
        let x_rev = Mat::from_fn(steps, 4, |i, j| x.at(steps - 1 - i, j));

        let (h, _) = bgru_forward(&x, &m).unwrap();
        let (h_mirror, _) = bgru_forward(&x_rev, &mirrored).unwrap();

        for t in 0..steps {
            let row = h.row(t);
            let mrow = h_mirror.row(steps - 1 - t);
            for i in 0..hidden {
                assert!((row[i] - mrow[hidden + i]).abs() < 1e-12);
                assert!((row[hidden + i] - mrow[i]).abs() < 1e-12);
            }
        }
    }

    /// Plain nested-loop re-implementation of the full stacked bidirectional
    /// forward pass, kept free of the Mat kernels.
    fn bgru_naive(x: &Mat<f64>, m: &ModelParams<f64>) -> Vec<Vec<f64>> {
        let steps = x.rows();
        let hidden = m.hidden_size();
        let mut layer_in: Vec<Vec<f64>> = (0..steps).map(|t| x.row(t).to_vec()).collect();
        for layer in &m.layers {
            let run = |p: &GruDirParams<f64>, reverse: bool| -> Vec<Vec<f64>> {
                let mut h = vec![vec![0.0; hidden]; steps];
                let mut h_prev = vec![0.0; hidden];
                let order: Vec<usize> = if reverse {
                    (0..steps).rev().collect()
                } else {
                    (0..steps).collect()
                };
                for &t in &order {
                    let xin = &layer_in[t];
                    let cat: Vec<f64> = h_prev.iter().chain(xin.iter()).copied().collect();
                    let gate = |w: &Mat<f64>, b: &[f64], v: &[f64]| -> Vec<f64> {
                        (0..hidden)
                            .map(|i| {
                                let mut a = b[i];
                                for (j, vj) in v.iter().enumerate() {
                                    a += w.at(i, j) * vj;
                                }
                                a
                            })
                            .collect()
                    };
                    let z: Vec<f64> = gate(&p.w_z, &p.b_z, &cat).iter().map(|&a| 1.0 / (1.0 + (-a).exp())).collect();
                    let r: Vec<f64> = gate(&p.w_r, &p.b_r, &cat).iter().map(|&a| 1.0 / (1.0 + (-a).exp())).collect();
                    let cat_c: Vec<f64> = (0..hidden)
                        .map(|i| r[i] * h_prev[i])
                        .chain(xin.iter().copied())
                        .collect();
                    let hbar: Vec<f64> = gate(&p.w_c, &p.b_c, &cat_c).iter().map(|a| a.tanh()).collect();
                    for i in 0..hidden {
                        h[t][i] = (1.0 - z[i]) * h_prev[i] + z[i] * hbar[i];
                    }
                    h_prev = h[t].clone();
                }
                h
            };
            let hf = run(&layer.fwd, false);
            let hb = run(&layer.bwd, true);
            layer_in = (0..steps)
                .map(|t| hf[t].iter().chain(hb[t].iter()).copied().collect())
                .collect();
        }
        layer_in
    }

    #[test]
    fn stacked_forward_matches_scalar_oracle() {
        let m = ModelParams::<f64>::init(4, 5, 2, 1234);
        let x = Mat::from_fn(8, 4, |i, j| ((i * 4 + j) as f64 * 0.13).sin() * 0.8);
        let (h, _) = bgru_forward(&x, &m).unwrap();
        let naive = bgru_naive(&x, &m);
        for t in 0..8 {
            for i in 0..10 {
                assert!(
                    (h.at(t, i) - naive[t][i]).abs() < 1e-12,
                    "t={t} i={i}: {} vs {}",
                    h.at(t, i),
                    naive[t][i]
                );
            }
        }
    }

    #[test]
    fn head_examples() {
        let hidden = 3;
        let mut head = HeadParams::<f64> {
            w: Mat::zeros(2, 2 * hidden),
            b: vec![0.3, -0.1],
        };
        let h = Mat::from_fn(4, 2 * hidden, |i, j| (i + j) as f64);
        let out = linear_head(&h, &head).unwrap();
        for t in 0..4 {
            assert_eq!(out.at(t, 0), 0.3);
            assert_eq!(out.at(t, 1), -0.1);
        }

        // Identity-like row: head copies hidden channel 1.
        head.b = vec![0.0, 0.0];
        head.w.set(0, 1, 1.0);
        let out = linear_head(&h, &head).unwrap();
        for t in 0..4 {
            assert_eq!(out.at(t, 0), h.at(t, 1));
        }

        let bad = Mat::<f64>::zeros(4, 5);
        assert!(linear_head(&bad, &head).is_err());
    }

    #[test]
    fn head_matches_scalar_oracle() {
        let mut s = crate::rng::SeedStream::from_seed(5);
        let head = HeadParams::<f64> {
            w: Mat::from_fn(2, 6, |_, _| s.uniform_in(-1.0, 1.0)),
            b: vec![s.uniform_in(-1.0, 1.0), s.uniform_in(-1.0, 1.0)],
        };
        let h = Mat::from_fn(3, 6, |_, _| s.uniform_in(-1.0, 1.0));
        let out = linear_head(&h, &head).unwrap();
        for t in 0..3 {
            for i in 0..2 {
                let mut acc = head.b[i];
                for j in 0..6 {
                    acc += head.w.at(i, j) * h.at(t, j);
                }
                assert!((out.at(t, i) - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loss_examples() {
        let truth: Vec<Complex<f64>> = vec![Complex::new(0.5, -0.25); 4];
        let pred = Mat::from_fn(4, 2, |_, j| if j == 0 { 0.5 } else { -0.25 });
        let (loss, grad) = mse_loss_and_grad(&pred, &truth).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.data().iter().all(|&v| v == 0.0));

        let pred_off = Mat::from_fn(4, 2, |_, j| if j == 0 { 1.5 } else { -0.25 });
        let (loss, grad) = mse_loss_and_grad(&pred_off, &truth).unwrap();
        assert!((loss - 1.0).abs() < 1e-15);
        for t in 0..4 {
            assert!((grad.at(t, 0) - 2.0 / 4.0).abs() < 1e-15);
            assert_eq!(grad.at(t, 1), 0.0);
        }

        assert!(mse_loss_and_grad(&pred, &truth[..2]).is_err());
    }

    #[test]
    fn forward_is_bitwise_deterministic() {
        let m = ModelParams::<f64>::init(4, 7, 2, 51);
        let x = Mat::from_fn(9, 4, |i, j| ((i * 3 + j) as f64 * 0.21).sin());
        let (a, _) = bgru_forward(&x, &m).unwrap();
        let (b, _) = bgru_forward(&x, &m).unwrap();
        assert_eq!(a, b);
        let pa = linear_head(&a, &m.head).unwrap();
        let pb = linear_head(&b, &m.head).unwrap();
        assert_eq!(pa, pb);
    }

    #[test]
    fn gradient_step_decreases_loss() {
        let m = ModelParams::<f64>::init(4, 4, 2, 3);
        let x = Mat::from_fn(6, 4, |i, j| ((i + j) as f64 * 0.4).sin());
        let truth: Vec<Complex<f64>> = (0..6).map(|t| Complex::new(0.3 + 0.01 * t as f64, -0.2)).collect();
        let mut grads = m.zeros_like();
        let loss0 = model_loss_and_grads(&m, &x, &truth, &mut grads).unwrap();
        let mut stepped = m.clone();
        let lr = 0.01;
        for (p, g) in stepped.tensors_mut().into_iter().zip(grads.tensors()) {
            for (pv, gv) in p.iter_mut().zip(g) {
                *pv -= lr * gv;
            }
        }
        let loss1 = model_loss(&stepped, &x, &truth).unwrap();
        assert!(loss1 < loss0, "{loss1} !< {loss0}");
    }
}
