//! Classical channel estimators: least squares with linear interpolation,
//! and Wiener/MMSE smoothing of the LS estimate with either the analytic
//! Jakes correlation ("theory") or a correlation estimated from the LS
//! output itself ("sim").

mod linalg;
mod report;

pub use linalg::{solve_hermitian, CholeskyFactor, HermitianMatrix, DIAGONAL_LOADING};
pub use report::{parse_reports_csv, write_reports_csv, EstimateReport, REPORT_CSV_HEADER};

use num_complex::Complex;

use crate::channel::{jakes_autocorr, DopplerSpec, NoiseSpec};
use crate::error::{Error, Result};
use crate::framing::Frame;
use crate::scalar::Real;

/// LS channel estimates at pilot positions only.
#[derive(Clone, Debug)]
pub struct PilotEstimates<T: Real> {
    pub positions: Vec<usize>,
    pub values: Vec<Complex<T>>,
}

/// Per-pilot least squares: at every pilot position `n`,
/// `hhat[n] = y[n] / x[n]`. Data positions are left unset.
pub fn ls_pilot_estimate<T: Real>(y: &[Complex<T>], frame: &Frame<T>) -> Result<PilotEstimates<T>> {
    ls_pilot_estimate_ref(y, &frame.pilot_ref)
}

/// [`ls_pilot_estimate`] against a bare pilot-reference sequence (pilot
/// symbols in place, zeros at data positions).
pub fn ls_pilot_estimate_ref<T: Real>(y: &[Complex<T>], pilot_ref: &[Complex<T>]) -> Result<PilotEstimates<T>> {
    if y.len() != pilot_ref.len() {
        return Err(Error::argument(format!(
            "received length {} does not match reference length {}",
            y.len(),
            pilot_ref.len()
        )));
    }
    let mut positions = Vec::new();
    let mut values = Vec::new();
    for (n, p) in pilot_ref.iter().enumerate() {
        if p.norm_sqr() > T::zero() {
            positions.push(n);
            values.push(y[n] / p);
        }
    }
    if positions.is_empty() {
        return Err(Error::argument("pilot reference contains no pilots"));
    }
    Ok(PilotEstimates { positions, values })
}

/// Linear interpolation of pilot estimates onto all L positions. Interior
/// positions blend the two flanking pilots; positions before the first (after
/// the last) pilot hold the nearest pilot value.
pub fn linear_interpolate<T: Real>(pilots: &PilotEstimates<T>, len: usize) -> Result<Vec<Complex<T>>> {
    if pilots.positions.is_empty() {
        return Err(Error::argument("cannot interpolate from zero pilot estimates"));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; len];
    let pos = &pilots.positions;
    let val = &pilots.values;

    for n in 0..len {
        let idx = match pos.binary_search(&n) {
            Ok(k) => {
                out[n] = val[k];
                continue;
            }
            Err(k) => k,
        };
        out[n] = if idx == 0 {
            val[0]
        } else if idx == pos.len() {
            val[pos.len() - 1]
        } else {
            let (j, k) = (pos[idx - 1], pos[idx]);
            let span = T::from_f64_lossy((k - j) as f64);
            let wj = T::from_f64_lossy((k - n) as f64) / span;
            let wk = T::from_f64_lossy((n - j) as f64) / span;
            val[idx - 1].scale(wj) + val[idx].scale(wk)
        };
    }
    Ok(out)
}

/// Full LS estimate: per-pilot division followed by linear interpolation.
pub fn ls_estimate<T: Real>(y: &[Complex<T>], frame: &Frame<T>) -> Result<Vec<Complex<T>>> {
    ls_estimate_ref(y, &frame.pilot_ref)
}

/// [`ls_estimate`] against a bare pilot-reference sequence.
pub fn ls_estimate_ref<T: Real>(y: &[Complex<T>], pilot_ref: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let pilots = ls_pilot_estimate_ref(y, pilot_ref)?;
    linear_interpolate(&pilots, y.len())
}

/// Analytic channel correlation matrix: Toeplitz with entry
/// `(i, j) = J0(2 pi phi_d |i - j|)`.
pub fn build_rhh_theory<T: Real>(len: usize, spec: &DopplerSpec<T>) -> HermitianMatrix<T> {
    let first_col: Vec<T> = (0..len as i64).map(|d| jakes_autocorr(d, spec)).collect();
    HermitianMatrix::from_toeplitz_real(&first_col)
}

/// Normalized biased autocorrelation of one sequence for lags 0..=max_lag:
/// `Rhat[d] = (1/L) sum_{n=d}^{L-1} h[n] conj(h[n-d])`, real part taken,
/// scaled so `Rhat[0] = 1`.
pub fn empirical_autocorr_sequence<T: Real>(h_ls: &[Complex<T>], max_lag: usize) -> Vec<T> {
    let len = h_ls.len();
    let mut lags = Vec::with_capacity(max_lag + 1);
    for d in 0..=max_lag.min(len.saturating_sub(1)) {
        let mut acc = 0.0f64;
        for n in d..len {
            let a = h_ls[n];
            let b = h_ls[n - d];
            acc += a.re.to_f64_lossy() * b.re.to_f64_lossy() + a.im.to_f64_lossy() * b.im.to_f64_lossy();
        }
        lags.push(acc / len as f64);
    }
    let r0 = lags[0];
    lags.into_iter().map(|v| T::from_f64_lossy(v / r0)).collect()
}

/// Empirical channel correlation matrix from an LS estimate: the biased
/// lag sums of [`empirical_autocorr_sequence`] assembled as a Toeplitz
/// matrix.
///
/// The biased scaling keeps the autocorrelation sequence positive
/// semidefinite, so the smoother's factorization cannot hit a negative
/// pivot; the per-lag-normalized variant is indefinite on short noisy
/// frames often enough to break the solve.
pub fn build_rhh_empirical<T: Real>(h_ls: &[Complex<T>]) -> HermitianMatrix<T> {
    let first_col = empirical_autocorr_sequence(h_ls, h_ls.len() - 1);
    HermitianMatrix::from_toeplitz_real(&first_col)
}

/// MMSE smoother `R (R + sigma_n^2 I)^{-1}` for one correlation matrix and
/// noise level; the factorization is done once so the filter can be applied
/// to many sequences.
#[derive(Clone, Debug)]
pub struct MmseFilter<T: Real> {
    chol: CholeskyFactor<T>,
    noise_variance: T,
}

impl<T: Real> MmseFilter<T> {
    pub fn new(r: &HermitianMatrix<T>, noise: &NoiseSpec<T>) -> Result<Self> {
        let n = r.order();
        let loaded = HermitianMatrix::from_lower(n, |i, j| {
            let mut v = r.at(i, j);
            if i == j {
                v.re += noise.noise_variance;
            }
            v
        });
        Ok(MmseFilter {
            chol: CholeskyFactor::new(&loaded)?,
            noise_variance: noise.noise_variance,
        })
    }

    /// Applies the smoother to an LS estimate. Evaluated as
    /// `hhat - sigma_n^2 z` with `(R~ + sigma_n^2 I) z = hhat`, which equals
    /// `R~ z` for the loaded matrix `R~` and reduces exactly to the identity
    /// as the noise variance goes to zero.
    pub fn apply(&self, h_ls: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let z = self.chol.solve(h_ls)?;
        Ok(h_ls
            .iter()
            .zip(&z)
            .map(|(h, zi)| h - zi.scale(self.noise_variance))
            .collect())
    }
}

/// One-shot MMSE estimate `R (R + sigma_n^2 I)^{-1} h_ls` (unit symbol
/// power). Solver failure is propagated.
pub fn mmse_estimate<T: Real>(
    h_ls: &[Complex<T>],
    r: &HermitianMatrix<T>,
    noise: &NoiseSpec<T>,
) -> Result<Vec<Complex<T>>> {
    if h_ls.len() != r.order() {
        return Err(Error::argument(format!(
            "estimate length {} does not match matrix order {}",
            h_ls.len(),
            r.order()
        )));
    }
    MmseFilter::new(r, noise)?.apply(h_ls)
}

/// Mean squared complex error `(1/L) sum |est[n] - truth[n]|^2`.
pub fn mse<T: Real>(estimate: &[Complex<T>], truth: &[Complex<T>]) -> Result<T> {
    if estimate.len() != truth.len() {
        return Err(Error::argument(format!(
            "estimate length {} does not match truth length {}",
            estimate.len(),
            truth.len()
        )));
    }
    if estimate.is_empty() {
        return Err(Error::argument("mse of empty sequences is undefined"));
    }
    let mut acc = T::zero();
    for (e, t) in estimate.iter().zip(truth) {
        acc += (e - t).norm_sqr();
    }
    Ok(acc / T::from_f64_lossy(estimate.len() as f64))
}
