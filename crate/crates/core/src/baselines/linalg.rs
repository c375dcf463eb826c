//! Dense Hermitian linear algebra for the MMSE estimators.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Diagonal loading added before every factorization. The channel
/// correlation matrix is near-singular at low Doppler (adjacent-lag
/// correlation ~1), so the solvers work with `A + LOADING * I`.
pub const DIAGONAL_LOADING: f64 = 1e-10;

/// Dense Hermitian matrix (full storage, row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    order: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Builds from a generator for the lower triangle (i >= j); mirror
    /// entries are conjugated, diagonal entries have their imaginary part
    /// dropped.
    pub fn from_lower(order: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let mut data = vec![zero; order * order];
        for i in 0..order {
            for j in 0..=i {
                let v = f(i, j);
                let v = if i == j { Complex::new(v.re, T::zero()) } else { v };
                data[i * order + j] = v;
                data[j * order + i] = v.conj();
            }
        }
        HermitianMatrix { order, data }
    }

    /// Real symmetric Toeplitz matrix with entry (i, j) = first_col[|i-j|].
    pub fn from_toeplitz_real(first_col: &[T]) -> Self {
        let order = first_col.len();
        Self::from_lower(order, |i, j| Complex::new(first_col[i - j], T::zero()))
    }

    pub fn identity(order: usize) -> Self {
        Self::from_lower(order, |i, j| {
            if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn at(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.order + j]
    }

    /// `A x` for a dense vector.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.order);
        (0..self.order)
            .map(|i| {
                let row = &self.data[i * self.order..(i + 1) * self.order];
                let mut acc = Complex::new(T::zero(), T::zero());
                for (a, b) in row.iter().zip(x) {
                    acc += a * b;
                }
                acc
            })
            .collect()
    }
}

/// Lower-triangular Cholesky factor of a loaded Hermitian matrix.
#[derive(Clone, Debug)]
pub struct CholeskyFactor<T: Real> {
    order: usize,
    l: Vec<Complex<T>>,
}

impl<T: Real> CholeskyFactor<T> {
    /// Factors `A + DIAGONAL_LOADING * I = L L^H`. Fails with a numerical
    /// error if a pivot is not strictly positive.
    pub fn new(a: &HermitianMatrix<T>) -> Result<Self> {
        let n = a.order;
        let loading = T::from_f64_lossy(DIAGONAL_LOADING);
        let zero = Complex::new(T::zero(), T::zero());
        let mut l = vec![zero; n * n];
        for j in 0..n {
            let mut d = a.at(j, j).re + loading;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::numerical(format!(
                    "matrix not positive definite after diagonal loading (pivot {d} at column {j})"
                )));
            }
            let djj = d.sqrt();
            l[j * n + j] = Complex::new(djj, T::zero());
            for i in (j + 1)..n {
                let mut s = a.at(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(CholeskyFactor { order: n, l })
    }

    /// Solves `(A + loading I) x = b` via the two triangular systems.
    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if b.len() != self.order {
            return Err(Error::argument(format!(
                "rhs length {} does not match order {}",
                b.len(),
                self.order
            )));
        }
        let n = self.order;
        // L y = b
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[i * n + k];
                let yk = y[k];
                y[i] -= lik * yk;
            }
            y[i] = y[i] / self.l[i * n + i];
        }
        // L^H x = y
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let lki = self.l[k * n + i].conj();
                let yk = y[k];
                y[i] -= lki * yk;
            }
            y[i] = y[i] / self.l[i * n + i];
        }
        Ok(y)
    }
}

/// One-shot loaded Hermitian solve: factors `A + DIAGONAL_LOADING * I` and
/// solves for `b`. Reports (rather than hides) indefiniteness.
pub fn solve_hermitian<T: Real>(a: &HermitianMatrix<T>, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    CholeskyFactor::new(a)?.solve(b)
}
