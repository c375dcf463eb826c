//! GRU cell: forward pass, analytic backward pass, and the per-direction
//! sequence runner used by the bidirectional layers.
//!
//! Gate equations (sigma = logistic, candidates tanh, concatenated input
//! convention `[h_prev, x]`):
//!
//! ```text
//! z = sigma(Wz [h_prev, x] + bz)
//! r = sigma(Wr [h_prev, x] + br)
//! hbar = tanh(Wc [r .* h_prev, x] + bc)
//! h = (1 - z) .* h_prev + z .* hbar
//! ```

use super::mat::{axpy, Mat};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Weights of one GRU direction. Gate matrices are `hidden x (hidden+input)`
/// over the concatenated `[h_prev, x]` (the candidate gate sees
/// `[r .* h_prev, x]`), with one bias vector per gate.
#[derive(Clone, Debug, PartialEq)]
pub struct GruDirParams<T: Real> {
    pub w_z: Mat<T>,
    pub w_r: Mat<T>,
    pub w_c: Mat<T>,
    pub b_z: Vec<T>,
    pub b_r: Vec<T>,
    pub b_c: Vec<T>,
}

impl<T: Real> GruDirParams<T> {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        let w = || Mat::zeros(hidden_size, hidden_size + input_size);
        GruDirParams {
            w_z: w(),
            w_r: w(),
            w_c: w(),
            b_z: vec![T::zero(); hidden_size],
            b_r: vec![T::zero(); hidden_size],
            b_c: vec![T::zero(); hidden_size],
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.w_z.rows()
    }

    pub fn input_size(&self) -> usize {
        self.w_z.cols() - self.w_z.rows()
    }

    pub fn check_shapes(&self) -> Result<()> {
        let h = self.hidden_size();
        let cols = self.w_z.cols();
        if cols <= h {
            return Err(Error::argument("gate width must exceed hidden size"));
        }
        for (name, w) in [("w_z", &self.w_z), ("w_r", &self.w_r), ("w_c", &self.w_c)] {
            if w.rows() != h || w.cols() != cols {
                return Err(Error::argument(format!("{name} has inconsistent shape")));
            }
        }
        for (name, b) in [("b_z", &self.b_z), ("b_r", &self.b_r), ("b_c", &self.b_c)] {
            if b.len() != h {
                return Err(Error::argument(format!("{name} has inconsistent length")));
            }
        }
        Ok(())
    }
}

fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Intermediates of one cell step, retained for the backward pass.
#[derive(Clone, Debug)]
pub struct GruCellCache<T: Real> {
    /// `[h_prev, x]`
    pub cat: Vec<T>,
    /// `[r .* h_prev, x]`
    pub cat_c: Vec<T>,
    pub z: Vec<T>,
    pub r: Vec<T>,
    pub hbar: Vec<T>,
}

fn cell_forward_into<T: Real>(
    p: &GruDirParams<T>,
    x: &[T],
    h_prev: &[T],
    cat: &mut [T],
    cat_c: &mut [T],
    z: &mut [T],
    r: &mut [T],
    hbar: &mut [T],
    h_out: &mut [T],
) {
    let hidden = p.hidden_size();
    cat[..hidden].copy_from_slice(h_prev);
    cat[hidden..].copy_from_slice(x);

    p.w_z.mul_vec_into(cat, z);
    for (zi, bi) in z.iter_mut().zip(&p.b_z) {
        *zi = sigmoid(*zi + *bi);
    }
    p.w_r.mul_vec_into(cat, r);
    for (ri, bi) in r.iter_mut().zip(&p.b_r) {
        *ri = sigmoid(*ri + *bi);
    }

    for i in 0..hidden {
        cat_c[i] = r[i] * h_prev[i];
    }
    cat_c[hidden..].copy_from_slice(x);

    p.w_c.mul_vec_into(cat_c, hbar);
    for (hi, bi) in hbar.iter_mut().zip(&p.b_c) {
        *hi = (*hi + *bi).tanh();
    }

    for i in 0..hidden {
        h_out[i] = (T::one() - z[i]) * h_prev[i] + z[i] * hbar[i];
    }
}

/// One GRU step. Errors if the input or hidden state does not match the
/// parameter shapes.
pub fn gru_cell_forward<T: Real>(
    x: &[T],
    h_prev: &[T],
    p: &GruDirParams<T>,
) -> Result<(Vec<T>, GruCellCache<T>)> {
    if x.len() != p.input_size() {
        return Err(Error::argument(format!(
            "input length {} does not match input size {}",
            x.len(),
            p.input_size()
        )));
    }
    if h_prev.len() != p.hidden_size() {
        return Err(Error::argument(format!(
            "hidden length {} does not match hidden size {}",
            h_prev.len(),
            p.hidden_size()
        )));
    }
    let hidden = p.hidden_size();
    let width = hidden + x.len();
    let mut cache = GruCellCache {
        cat: vec![T::zero(); width],
        cat_c: vec![T::zero(); width],
        z: vec![T::zero(); hidden],
        r: vec![T::zero(); hidden],
        hbar: vec![T::zero(); hidden],
    };
    let mut h = vec![T::zero(); hidden];
    cell_forward_into(
        p,
        x,
        h_prev,
        &mut cache.cat,
        &mut cache.cat_c,
        &mut cache.z,
        &mut cache.r,
        &mut cache.hbar,
        &mut h,
    );
    Ok((h, cache))
}

/// Scratch buffers for [`cell_backward_into`]; reused across steps.
struct BackwardScratch<T> {
    da: Vec<T>,
    dcat: Vec<T>,
    dr: Vec<T>,
}

impl<T: Real> BackwardScratch<T> {
    fn new(hidden: usize, width: usize) -> Self {
        BackwardScratch {
            da: vec![T::zero(); hidden],
            dcat: vec![T::zero(); width],
            dr: vec![T::zero(); hidden],
        }
    }
}

/// Reverse-mode step: given dL/dh, accumulates parameter gradients into
/// `grads` and writes dL/dx and dL/dh_prev.
#[allow(clippy::too_many_arguments)]
fn cell_backward_into<T: Real>(
    grad_h: &[T],
    cache_cat: &[T],
    cache_cat_c: &[T],
    z: &[T],
    r: &[T],
    hbar: &[T],
    p: &GruDirParams<T>,
    grads: &mut GruDirParams<T>,
    dx: &mut [T],
    dh_prev: &mut [T],
    scratch: &mut BackwardScratch<T>,
) {
    let hidden = p.hidden_size();
    let h_prev = &cache_cat[..hidden];
    let one = T::one();

    // h = (1 - z) h_prev + z hbar
    for i in 0..hidden {
        dh_prev[i] = grad_h[i] * (one - z[i]);
    }

    // Candidate path.
    for i in 0..hidden {
        let dhbar = grad_h[i] * z[i];
        scratch.da[i] = dhbar * (one - hbar[i] * hbar[i]);
    }
    for i in 0..hidden {
        grads.b_c[i] += scratch.da[i];
        axpy(scratch.da[i], cache_cat_c, grads.w_c.row_mut(i));
    }
    scratch.dcat.iter_mut().for_each(|v| *v = T::zero());
    p.w_c.mul_t_vec_acc(&scratch.da, &mut scratch.dcat);
    for i in 0..hidden {
        scratch.dr[i] = scratch.dcat[i] * h_prev[i];
        dh_prev[i] += scratch.dcat[i] * r[i];
    }
    dx.copy_from_slice(&scratch.dcat[hidden..]);

    // Update gate path.
    for i in 0..hidden {
        let dz = grad_h[i] * (hbar[i] - h_prev[i]);
        scratch.da[i] = dz * z[i] * (one - z[i]);
    }
    for i in 0..hidden {
        grads.b_z[i] += scratch.da[i];
        axpy(scratch.da[i], cache_cat, grads.w_z.row_mut(i));
    }
    scratch.dcat.iter_mut().for_each(|v| *v = T::zero());
    p.w_z.mul_t_vec_acc(&scratch.da, &mut scratch.dcat);
    for i in 0..hidden {
        dh_prev[i] += scratch.dcat[i];
    }
    for (o, d) in dx.iter_mut().zip(&scratch.dcat[hidden..]) {
        *o += *d;
    }

    // Reset gate path.
    for i in 0..hidden {
        scratch.da[i] = scratch.dr[i] * r[i] * (one - r[i]);
    }
    for i in 0..hidden {
        grads.b_r[i] += scratch.da[i];
        axpy(scratch.da[i], cache_cat, grads.w_r.row_mut(i));
    }
    scratch.dcat.iter_mut().for_each(|v| *v = T::zero());
    p.w_r.mul_t_vec_acc(&scratch.da, &mut scratch.dcat);
    for i in 0..hidden {
        dh_prev[i] += scratch.dcat[i];
    }
    for (o, d) in dx.iter_mut().zip(&scratch.dcat[hidden..]) {
        *o += *d;
    }
}

/// One-step reverse mode for [`gru_cell_forward`]: returns
/// `(grad_x, grad_h_prev, grad_params)`.
pub fn gru_cell_backward<T: Real>(
    grad_h: &[T],
    cache: &GruCellCache<T>,
    p: &GruDirParams<T>,
) -> Result<(Vec<T>, Vec<T>, GruDirParams<T>)> {
    let hidden = p.hidden_size();
    let input = p.input_size();
    if grad_h.len() != hidden {
        return Err(Error::argument(format!(
            "gradient length {} does not match hidden size {hidden}",
            grad_h.len()
        )));
    }
    if cache.cat.len() != hidden + input || cache.z.len() != hidden {
        return Err(Error::argument("cache does not match parameter shapes"));
    }
    let mut grads = GruDirParams::zeros(input, hidden);
    let mut dx = vec![T::zero(); input];
    let mut dh_prev = vec![T::zero(); hidden];
    let mut scratch = BackwardScratch::new(hidden, hidden + input);
    cell_backward_into(
        grad_h,
        &cache.cat,
        &cache.cat_c,
        &cache.z,
        &cache.r,
        &cache.hbar,
        p,
        &mut grads,
        &mut dx,
        &mut dh_prev,
        &mut scratch,
    );
    Ok((dx, dh_prev, grads))
}

/// Cached intermediates of one direction over a window; row `t` of each
/// matrix belongs to time step `t` regardless of scan direction.
#[derive(Clone, Debug)]
pub struct GruSeqCache<T: Real> {
    pub cat: Mat<T>,
    pub cat_c: Mat<T>,
    pub z: Mat<T>,
    pub r: Mat<T>,
    pub hbar: Mat<T>,
}

/// Runs one direction over the whole window from a zero initial state.
/// `input` is time-major (`T x input_size`); `reverse` scans t = T-1..0.
pub fn gru_dir_forward<T: Real>(
    input: &Mat<T>,
    reverse: bool,
    p: &GruDirParams<T>,
    want_cache: bool,
) -> (Mat<T>, Option<GruSeqCache<T>>) {
    let steps = input.rows();
    let hidden = p.hidden_size();
    let width = hidden + p.input_size();
    let mut h = Mat::zeros(steps, hidden);
    let mut cache = want_cache.then(|| GruSeqCache {
        cat: Mat::zeros(steps, width),
        cat_c: Mat::zeros(steps, width),
        z: Mat::zeros(steps, hidden),
        r: Mat::zeros(steps, hidden),
        hbar: Mat::zeros(steps, hidden),
    });

    let mut h_prev = vec![T::zero(); hidden];
    let mut cat_buf = vec![T::zero(); width];
    let mut cat_c_buf = vec![T::zero(); width];
    let mut z_buf = vec![T::zero(); hidden];
    let mut r_buf = vec![T::zero(); hidden];
    let mut hbar_buf = vec![T::zero(); hidden];

    let mut run = |t: usize, h: &mut Mat<T>, cache: &mut Option<GruSeqCache<T>>, h_prev: &mut Vec<T>| {
        cell_forward_into(
            p,
            input.row(t),
            h_prev,
            &mut cat_buf,
            &mut cat_c_buf,
            &mut z_buf,
            &mut r_buf,
            &mut hbar_buf,
            h.row_mut(t),
        );
        if let Some(c) = cache.as_mut() {
            c.cat.row_mut(t).copy_from_slice(&cat_buf);
            c.cat_c.row_mut(t).copy_from_slice(&cat_c_buf);
            c.z.row_mut(t).copy_from_slice(&z_buf);
            c.r.row_mut(t).copy_from_slice(&r_buf);
            c.hbar.row_mut(t).copy_from_slice(&hbar_buf);
        }
        h_prev.copy_from_slice(h.row(t));
    };

    if reverse {
        for t in (0..steps).rev() {
            run(t, &mut h, &mut cache, &mut h_prev);
        }
    } else {
        for t in 0..steps {
            run(t, &mut h, &mut cache, &mut h_prev);
        }
    }
    (h, cache)
}

/// Reverse-mode pass of one direction. `grad_h` carries dL/dh_t from above
/// for every step; parameter gradients accumulate into `grads`; the return
/// value is dL/dinput (time-major).
pub fn gru_dir_backward<T: Real>(
    grad_h: &Mat<T>,
    cache: &GruSeqCache<T>,
    reverse: bool,
    p: &GruDirParams<T>,
    grads: &mut GruDirParams<T>,
) -> Mat<T> {
    let steps = grad_h.rows();
    let hidden = p.hidden_size();
    let input = p.input_size();
    let mut grad_input = Mat::zeros(steps, input);
    let mut carry = vec![T::zero(); hidden];
    let mut g_total = vec![T::zero(); hidden];
    let mut dh_prev = vec![T::zero(); hidden];
    let mut scratch = BackwardScratch::new(hidden, hidden + input);

    let mut run = |t: usize, grad_input: &mut Mat<T>, carry: &mut Vec<T>| {
        for i in 0..hidden {
            g_total[i] = grad_h.at(t, i) + carry[i];
        }
        cell_backward_into(
            &g_total,
            cache.cat.row(t),
            cache.cat_c.row(t),
            cache.z.row(t),
            cache.r.row(t),
            cache.hbar.row(t),
            p,
            grads,
            grad_input.row_mut(t),
            &mut dh_prev,
            &mut scratch,
        );
        carry.copy_from_slice(&dh_prev);
    };

    // Visit steps in the reverse of the processing order so the hidden-state
    // chain gradient flows to each step's predecessor.
    if reverse {
        for t in 0..steps {
            run(t, &mut grad_input, &mut carry);
        }
    } else {
        for t in (0..steps).rev() {
            run(t, &mut grad_input, &mut carry);
        }
    }
    grad_input
}
