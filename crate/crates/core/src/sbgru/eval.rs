//! Paired evaluation of the learned estimator against the classical
//! baselines on shared noisy observations, and the channel-tracking trace
//! export.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;

use super::{block_estimate, sliding_estimate, SlidingConfig};
use crate::baselines::{
    build_rhh_empirical, build_rhh_theory, ls_estimate_ref, mmse_estimate, mse, EstimateReport, MmseFilter,
};
use crate::channel::{apply_channel, apply_channel_gains, ChannelRealization, NoiseSpec};
use crate::dataset::Split;
use crate::error::{Error, Result};
use crate::framing::{to_features, FeatureMatrix, Frame};
use crate::nn::ModelParams;
use crate::rng::{derive_seed, domains};
use crate::scalar::Real;

/// Estimator labels as they appear in report CSVs.
pub const ESTIMATOR_NAMES: [&str; 5] = ["sbgru", "bgru_block", "ls", "mmse_theory", "mmse_sim"];

struct RecordScores {
    sbgru: f64,
    block: Option<f64>,
    ls: f64,
    mmse_theory: f64,
    mmse_sim: f64,
}

/// Evaluates the trained model and the classical baselines on a held-out
/// split. For each SNR, every sequence gets a fresh noisy observation
/// (seeded by `(EVAL_NOISE, snr index, sequence index)`); all estimators see
/// the same observation. Emits one report per estimator per SNR, in
/// [`ESTIMATOR_NAMES`] order with `bgru_block` present only when `block` is
/// given.
pub fn evaluate<T: Real>(
    model: &ModelParams<T>,
    split: &Split<T>,
    sliding: &SlidingConfig,
    snr_list_db: &[T],
    master_seed: u64,
    block: Option<usize>,
) -> Result<Vec<EstimateReport>> {
    split.validate()?;
    let records = &split.sequences.records;
    if records.is_empty() {
        return Err(Error::argument("evaluation split is empty"));
    }
    let len = split.sequences.layout.total_length();
    if sliding.sequence_length() != len {
        return Err(Error::argument("sliding config does not match dataset sequence length"));
    }
    let spec = split.channels[0].spec;
    let r_theory = build_rhh_theory(len, &spec);

    let mut reports = Vec::new();
    for (si, &snr_db) in snr_list_db.iter().enumerate() {
        let noise = NoiseSpec::from_snr_db(snr_db);
        let theory_filter = MmseFilter::new(&r_theory, &noise)?;
        let seed_base = derive_seed(master_seed, domains::EVAL_NOISE, si as u64);

        let scores: Vec<RecordScores> = records
            .par_iter()
            .enumerate()
            .map(|(i, rec)| {
                let h = split.channel_of(rec);
                let y = apply_channel(&rec.symbols, h, &noise, derive_seed(seed_base, 0, i as u64))?;
                let feats = to_features(&y, &rec.pilot_ref)?;
                let truth = &h.gains;

                let est_sbgru = sliding_estimate(&feats, model, sliding)?;
                let est_block = block.map(|b| block_estimate(&feats, model, b)).transpose()?;
                let est_ls = ls_estimate_ref(&y, &rec.pilot_ref)?;
                let est_theory = theory_filter.apply(&est_ls)?;
                let r_emp = build_rhh_empirical(&est_ls);
                let est_sim = mmse_estimate(&est_ls, &r_emp, &noise)?;

                Ok(RecordScores {
                    sbgru: mse(&est_sbgru, truth)?.to_f64_lossy(),
                    block: est_block.map(|e| mse(&e, truth).map(|v| v.to_f64_lossy())).transpose()?,
                    ls: mse(&est_ls, truth)?.to_f64_lossy(),
                    mmse_theory: mse(&est_theory, truth)?.to_f64_lossy(),
                    mmse_sim: mse(&est_sim, truth)?.to_f64_lossy(),
                })
            })
            .collect::<Result<_>>()?;

        let n = scores.len() as f64;
        let count = scores.len() as u64;
        let snr = snr_db.to_f64_lossy();
        let mean = |f: &dyn Fn(&RecordScores) -> f64| scores.iter().map(|s| f(s)).sum::<f64>() / n;

        reports.push(EstimateReport::new("sbgru", snr, mean(&|s| s.sbgru), count)?);
        if block.is_some() {
            reports.push(EstimateReport::new(
                "bgru_block",
                snr,
                mean(&|s| s.block.expect("block scores present")),
                count,
            )?);
        }
        reports.push(EstimateReport::new("ls", snr, mean(&|s| s.ls), count)?);
        reports.push(EstimateReport::new("mmse_theory", snr, mean(&|s| s.mmse_theory), count)?);
        reports.push(EstimateReport::new("mmse_sim", snr, mean(&|s| s.mmse_sim), count)?);
    }
    Ok(reports)
}

/// Evaluates a single custom estimator on the same observations that
/// [`evaluate`] generates (same seed derivation), reporting one row per SNR.
/// The estimator sees `(sequence index, features)`.
pub fn evaluate_custom<T, F>(
    name: &str,
    estimator: F,
    split: &Split<T>,
    snr_list_db: &[T],
    master_seed: u64,
) -> Result<Vec<EstimateReport>>
where
    T: Real,
    F: Fn(usize, &FeatureMatrix<T>) -> Result<Vec<Complex<T>>> + Sync,
{
    split.validate()?;
    let records = &split.sequences.records;
    if records.is_empty() {
        return Err(Error::argument("evaluation split is empty"));
    }
    let mut reports = Vec::new();
    for (si, &snr_db) in snr_list_db.iter().enumerate() {
        let noise = NoiseSpec::from_snr_db(snr_db);
        let seed_base = derive_seed(master_seed, domains::EVAL_NOISE, si as u64);
        let scores: Vec<f64> = records
            .par_iter()
            .enumerate()
            .map(|(i, rec)| {
                let h = split.channel_of(rec);
                let y = apply_channel(&rec.symbols, h, &noise, derive_seed(seed_base, 0, i as u64))?;
                let feats = to_features(&y, &rec.pilot_ref)?;
                let est = estimator(i, &feats)?;
                Ok(mse(&est, &h.gains)?.to_f64_lossy())
            })
            .collect::<Result<_>>()?;
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        reports.push(EstimateReport::new(name, snr_db.to_f64_lossy(), mean, scores.len() as u64)?);
    }
    Ok(reports)
}

/// Trace CSV column header.
pub const TRACE_CSV_HEADER: &str = "n,h_re,h_im,h_abs,sbgru_re,sbgru_im,sbgru_abs,ls_abs,mmse_sim_abs";

/// Whole-trace MSE of each exported estimator.
#[derive(Clone, Copy, Debug)]
pub struct TraceSummary {
    pub mse_sbgru: f64,
    pub mse_ls: f64,
    pub mse_mmse_sim: f64,
}

/// Runs the sliding estimator, LS, and MMSE-sim over one long noisy
/// transmission and writes the per-symbol tracking trace as CSV
/// ([`TRACE_CSV_HEADER`]; one row per symbol).
///
/// MMSE-sim is applied independently per `mmse_chunk`-symbol segment (its
/// correlation estimate is defined on a frame, not on an arbitrarily long
/// stream), so `mmse_chunk` must divide the trace length.
pub fn trace_export<T: Real, W: Write>(
    model: &ModelParams<T>,
    sliding: &SlidingConfig,
    channel: &ChannelRealization<T>,
    frame: &Frame<T>,
    noise: &NoiseSpec<T>,
    noise_seed: u64,
    mmse_chunk: usize,
    mut out: W,
) -> Result<TraceSummary> {
    let len = channel.len();
    if frame.symbols.len() != len {
        return Err(Error::argument(format!(
            "frame length {} does not match channel length {len} (tile the frame to the channel)",
            frame.symbols.len()
        )));
    }
    if sliding.sequence_length() != len {
        return Err(Error::argument("sliding config does not match trace length"));
    }
    if mmse_chunk == 0 || len % mmse_chunk != 0 {
        return Err(Error::argument(format!(
            "MMSE chunk {mmse_chunk} must divide trace length {len}"
        )));
    }

    let y = apply_channel_gains(&frame.symbols, &channel.gains, noise, noise_seed)?;
    let feats = to_features(&y, &frame.pilot_ref)?;
    let est_sbgru = sliding_estimate(&feats, model, sliding)?;
    let est_ls = ls_estimate_ref(&y, &frame.pilot_ref)?;
    let mut est_sim = Vec::with_capacity(len);
    for chunk_start in (0..len).step_by(mmse_chunk) {
        let ls_chunk = &est_ls[chunk_start..chunk_start + mmse_chunk];
        let r_emp = build_rhh_empirical(ls_chunk);
        est_sim.extend(mmse_estimate(ls_chunk, &r_emp, noise)?);
    }

    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for n in 0..len {
        let h = channel.gains[n];
        let s = est_sbgru[n];
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            n,
            h.re.to_f64_lossy(),
            h.im.to_f64_lossy(),
            h.norm().to_f64_lossy(),
            s.re.to_f64_lossy(),
            s.im.to_f64_lossy(),
            s.norm().to_f64_lossy(),
            est_ls[n].norm().to_f64_lossy(),
            est_sim[n].norm().to_f64_lossy(),
        )?;
    }

    Ok(TraceSummary {
        mse_sbgru: mse(&est_sbgru, &channel.gains)?.to_f64_lossy(),
        mse_ls: mse(&est_ls, &channel.gains)?.to_f64_lossy(),
        mse_mmse_sim: mse(&est_sim, &channel.gains)?.to_f64_lossy(),
    })
}
