//! Channel-estimation laboratory for time-selective Rayleigh fading:
//! Jakes-spectrum channel synthesis, pilot-framed QPSK transmission, exact
//! LS/MMSE baselines, and a from-scratch sliding bidirectional GRU estimator
//! with its training and evaluation harness.
//!
//! All numeric code is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the concrete aliases below pin the two standard
//! instantiations. Everything is deterministic given the seeds threaded
//! through [`rng`].

pub mod baselines;
pub mod channel;
pub mod dataset;
pub mod error;
pub mod framing;
pub mod io;
pub mod nn;
pub mod rng;
pub mod sbgru;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex sample at storage precision.
pub type Complex32 = num_complex::Complex<f32>;
/// Complex sample at reference precision.
pub type Complex64 = num_complex::Complex<f64>;

/// Reference-precision (f64) instantiations, used by the CLI pipeline.
pub type DopplerSpec64 = channel::DopplerSpec<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type NoiseSpec64 = channel::NoiseSpec<f64>;
pub type Frame64 = framing::Frame<f64>;
pub type FeatureMatrix64 = framing::FeatureMatrix<f64>;
pub type ModelParams64 = nn::ModelParams<f64>;
pub type Split64 = dataset::Split<f64>;
pub type TrainConfig64 = sbgru::TrainConfig<f64>;

/// Single-precision instantiations.
pub type DopplerSpec32 = channel::DopplerSpec<f32>;
pub type ChannelRealization32 = channel::ChannelRealization<f32>;
pub type ModelParams32 = nn::ModelParams<f32>;
