//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type implementing [`Real`] (`f32` or `f64`).
//!
//! `f64` is the reference precision: gradient checks, the Bessel evaluation,
//! and the Hermitian solver tolerances are all stated for `f64`. `f32` is
//! supported for bulk training and matches the on-disk sample width of the
//! binary formats.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssignOps
    + Default
    + Send
    + Sync
    + std::fmt::Debug
    + std::fmt::Display
    + 'static
{
    /// Lossy conversion from `f64` (rounds for `f32`).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Real")
    }

    /// Lossless widening to `f64` for `f32`/`f64`.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
