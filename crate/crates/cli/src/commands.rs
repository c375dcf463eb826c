//! The experiment commands: dataset generation, training, evaluation,
//! sweeps, and trace export. Every command is a deterministic function of
//! (config, seed); rerunning writes byte-identical artifacts.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex;

use fadelab_core::baselines::{write_reports_csv, EstimateReport};
use fadelab_core::channel::{generate_channel, ChannelRealization, NoiseSpec};
use fadelab_core::dataset::{build_sequences, generate_channel_pool, pilot_bits, SequenceRecord, SequenceSet, Split};
use fadelab_core::error::{Error, Result};
use fadelab_core::framing::{assemble_frame, random_bits, FrameLayout};
use fadelab_core::io::{read_fch, read_fds, read_fnn, write_fch, write_fds, write_fnn, ChannelFile, DatasetFile, DatasetRecord};
use fadelab_core::nn::ModelParams;
use fadelab_core::rng::{derive_seed, domains};
use fadelab_core::sbgru::{evaluate, evaluate_custom, sliding_estimate, trace_export, train, SlidingConfig};

use crate::config::ExperimentConfig;

pub const SPLIT_NAMES: [&str; 3] = ["train", "val", "test"];

pub fn channels_path(out: &Path, split: &str) -> PathBuf {
    out.join(format!("channels_{split}.fch"))
}

pub fn dataset_path(out: &Path, split: &str) -> PathBuf {
    out.join(format!("dataset_{split}.fds"))
}

pub fn model_path(out: &Path) -> PathBuf {
    out.join("model.fnn")
}

pub fn train_log_path(out: &Path) -> PathBuf {
    out.join("train_log.csv")
}

pub fn eval_mse_path(out: &Path) -> PathBuf {
    out.join("eval_mse.csv")
}

pub fn eval_block_path(out: &Path) -> PathBuf {
    out.join("eval_block.csv")
}

pub fn sweep_window_path(out: &Path) -> PathBuf {
    out.join("sweep_window.csv")
}

pub fn sweep_pilot_path(out: &Path) -> PathBuf {
    out.join("sweep_pilot.csv")
}

pub fn sweep_pilot_model_path(out: &Path, pilots: usize) -> PathBuf {
    out.join(format!("sweep_pilot_np{pilots}.fnn"))
}

pub fn trace_path(out: &Path) -> PathBuf {
    out.join("trace.csv")
}

fn narrow(gains: &[Complex<f64>]) -> Vec<Complex<f32>> {
    gains.iter().map(|c| Complex::new(c.re as f32, c.im as f32)).collect()
}

fn widen(gains: &[Complex<f32>]) -> Vec<Complex<f64>> {
    gains.iter().map(|c| Complex::new(c.re as f64, c.im as f64)).collect()
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Per-split (count, global index offset) tuples.
fn split_plan(counts: [usize; 3], offsets: (u64, u64, u64)) -> Vec<(&'static str, usize, u64)> {
    vec![
        (SPLIT_NAMES[0], counts[0], offsets.0),
        (SPLIT_NAMES[1], counts[1], offsets.1),
        (SPLIT_NAMES[2], counts[2], offsets.2),
    ]
}

/// Generates the train/val/test channel ensembles and writes the ".fch"
/// files.
pub fn cmd_gen_channels(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let spec = cfg.doppler_spec()?;
    let length = cfg.layout()?.total_length();
    fs::create_dir_all(out)?;
    for (name, count, offset) in split_plan(
        [cfg.train_channels, cfg.val_channels, cfg.test_channels],
        cfg.channel_offsets(),
    ) {
        let pool = generate_channel_pool::<f64>(count, length, &spec, cfg.seed, offset)?;
        let storage: Vec<Vec<Complex<f32>>> = pool.iter().map(|r| narrow(&r.gains)).collect();
        let path = channels_path(out, name);
        write_fch(create(&path)?, spec.normalized_doppler(), &storage)?;
        println!("wrote {} ({count} realizations of length {length})", path.display());
    }
    Ok(())
}

fn read_channels(cfg: &ExperimentConfig, out: &Path, split: &str, expected_len: usize) -> Result<Vec<ChannelRealization<f64>>> {
    let spec = cfg.doppler_spec()?;
    let path = channels_path(out, split);
    let file: ChannelFile = read_fch(open(&path)?)?;
    let rel = ((file.normalized_doppler - spec.normalized_doppler()) / spec.normalized_doppler()).abs();
    if rel > 1e-12 {
        return Err(Error::format(format!(
            "{}: normalized Doppler {} does not match configuration {}",
            path.display(),
            file.normalized_doppler,
            spec.normalized_doppler()
        )));
    }
    if file.length as usize != expected_len {
        return Err(Error::format(format!(
            "{}: channel length {} does not match frame length {expected_len}",
            path.display(),
            file.length
        )));
    }
    Ok(file
        .realizations
        .iter()
        .map(|gains| ChannelRealization {
            gains: widen(gains),
            spec,
            seed: 0, // not recorded in the file format
        })
        .collect())
}

/// Generates the pilot-framed sequence datasets against existing channel
/// files and writes the ".fds" files.
pub fn cmd_gen_dataset(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let layout = cfg.layout()?;
    fs::create_dir_all(out)?;
    for (name, count, offset) in split_plan(
        [cfg.train_sequences, cfg.val_sequences, cfg.test_sequences],
        cfg.sequence_offsets(),
    ) {
        let channels = read_channels(cfg, out, name, layout.total_length())?;
        let set = build_sequences::<f64>(&layout, count, channels.len(), cfg.seed, offset)?;
        let file = DatasetFile {
            total_length: layout.total_length() as u32,
            block_length: layout.block_length() as u32,
            pilots_per_block: layout.pilots_per_block() as u32,
            block_count: layout.block_count() as u32,
            records: set
                .records
                .iter()
                .map(|r| DatasetRecord {
                    channel_index: r.channel_index,
                    symbols: narrow(&r.symbols),
                    pilot_ref: narrow(&r.pilot_ref),
                })
                .collect(),
        };
        let path = dataset_path(out, name);
        write_fds(create(&path)?, &file)?;
        println!("wrote {} ({count} sequences of length {})", path.display(), layout.total_length());
    }
    Ok(())
}

fn read_split(cfg: &ExperimentConfig, out: &Path, split: &str, layout: &FrameLayout) -> Result<Split<f64>> {
    let path = dataset_path(out, split);
    let file: DatasetFile = read_fds(open(&path)?)?;
    if file.total_length as usize != layout.total_length()
        || file.block_length as usize != layout.block_length()
        || file.pilots_per_block as usize != layout.pilots_per_block()
        || file.block_count as usize != layout.block_count()
    {
        return Err(Error::format(format!(
            "{}: layout {}x{} ({} pilots) does not match configuration",
            path.display(),
            file.block_length,
            file.block_count,
            file.pilots_per_block
        )));
    }
    let channels = read_channels(cfg, out, split, layout.total_length())?;
    let split = Split {
        sequences: SequenceSet {
            layout: layout.clone(),
            records: file
                .records
                .into_iter()
                .map(|r| SequenceRecord {
                    channel_index: r.channel_index,
                    symbols: widen(&r.symbols),
                    pilot_ref: widen(&r.pilot_ref),
                })
                .collect(),
        },
        channels,
    };
    split.validate()?;
    Ok(split)
}

fn write_train_log(path: &Path, log: &[fadelab_core::sbgru::TrainLogEntry]) -> Result<()> {
    use std::io::Write;
    let mut w = create(path)?;
    writeln!(w, "epoch,train_loss,val_loss")?;
    for e in log {
        writeln!(w, "{},{},{}", e.epoch, e.train_loss, e.val_loss)?;
    }
    Ok(())
}

/// Trains the estimator on the generated datasets; writes the checkpoint and
/// the per-epoch loss log.
pub fn cmd_train(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let layout = cfg.layout()?;
    let train_split = read_split(cfg, out, "train", &layout)?;
    let val_split = read_split(cfg, out, "val", &layout)?;
    let sliding = SlidingConfig::new(cfg.window_length, layout.total_length())?;
    let model = ModelParams::<f64>::init(
        4,
        cfg.hidden_size,
        cfg.hidden_layers,
        derive_seed(cfg.seed, domains::NN_INIT, 0),
    );
    println!(
        "training: {} sequences, {} epochs, batch {}, window {}, {} parameters",
        train_split.sequences.records.len(),
        cfg.epochs,
        cfg.batch_size,
        cfg.window_length,
        model.param_count()
    );
    let outcome = train(model, &train_split, &val_split, &sliding, &cfg.train_config())?;
    for e in &outcome.log {
        println!("epoch {:>3}: train {:.6} val {:.6}", e.epoch, e.train_loss, e.val_loss);
    }
    if let Some(best) = outcome.best_epoch {
        println!("best validation epoch: {best}");
    }
    write_fnn(create(&model_path(out))?, &outcome.model)?;
    write_train_log(&train_log_path(out), &outcome.log)?;
    println!("wrote {}", model_path(out).display());
    Ok(())
}

fn load_model(out: &Path) -> Result<ModelParams<f64>> {
    read_fnn(open(&model_path(out))?)
}

/// Evaluates the trained model and the classical baselines over the test
/// SNR grid; writes the MSE-vs-SNR table and the sliding-vs-block table.
pub fn cmd_eval(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let layout = cfg.layout()?;
    let len = layout.total_length();
    let split = read_split(cfg, out, "test", &layout)?;
    let model = load_model(out)?;
    let sliding = SlidingConfig::new(cfg.window_length, len)?;
    let block = (len % cfg.window_length == 0).then_some(cfg.window_length);
    let reports = evaluate(&model, &split, &sliding, &cfg.test_snr_db, cfg.seed, block)?;
    write_reports_csv(create(&eval_mse_path(out))?, &reports)?;
    let block_rows: Vec<EstimateReport> = reports
        .iter()
        .filter(|r| r.estimator == "sbgru" || r.estimator == "bgru_block")
        .cloned()
        .collect();
    write_reports_csv(create(&eval_block_path(out))?, &block_rows)?;
    for r in &reports {
        println!("{:>12} @ {:>5} dB: mse {:.6e}", r.estimator, r.snr_db, r.mse);
    }
    println!("wrote {} and {}", eval_mse_path(out).display(), eval_block_path(out).display());
    Ok(())
}

pub const SWEEP_CSV_HEADER: &str = "axis,axis_value,estimator,snr_db,mse,sample_count";

fn write_sweep_csv(path: &Path, rows: &[(String, String, EstimateReport)]) -> Result<()> {
    use std::io::Write;
    let mut w = create(path)?;
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for (axis, value, r) in rows {
        writeln!(w, "{axis},{value},{},{},{},{}", r.estimator, r.snr_db, r.mse, r.sample_count)?;
    }
    Ok(())
}

/// Inference-only window-length sweep on the trained checkpoint.
pub fn cmd_sweep_window(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let layout = cfg.layout()?;
    let len = layout.total_length();
    let split = read_split(cfg, out, "test", &layout)?;
    let model = load_model(out)?;
    let mut rows = Vec::new();
    for &w in &cfg.window_length_list {
        let sliding = SlidingConfig::new(w, len)?;
        let reports = evaluate_custom(
            "sbgru",
            |_, feats| sliding_estimate(feats, &model, &sliding),
            &split,
            &cfg.test_snr_db,
            cfg.seed,
        )?;
        for r in &reports {
            println!("window {w:>3} @ {:>5} dB: mse {:.6e}", r.snr_db, r.mse);
        }
        rows.extend(reports.into_iter().map(|r| ("window_length".to_string(), w.to_string(), r)));
    }
    write_sweep_csv(&sweep_window_path(out), &rows)?;
    println!("wrote {}", sweep_window_path(out).display());
    Ok(())
}

/// Pilot-density sweep: per density, regenerates the datasets (reusing the
/// channel files), retrains, checkpoints, and evaluates against the
/// baselines.
pub fn cmd_sweep_pilot(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let base_layout = cfg.layout()?;
    let len = base_layout.total_length();
    let channels_train = read_channels(cfg, out, "train", len)?;
    let channels_val = read_channels(cfg, out, "val", len)?;
    let channels_test = read_channels(cfg, out, "test", len)?;
    let (train_off, val_off, test_off) = cfg.sequence_offsets();

    let mut rows = Vec::new();
    for &density in &cfg.pilot_density_list {
        let np = cfg.pilots_for_density(density)?;
        let layout = FrameLayout::new(cfg.block_length, np, cfg.block_count)?;
        println!("pilot density {density} ({np} pilots per block): generating datasets");
        let make_split = |count: usize, offset: u64, channels: &[ChannelRealization<f64>]| -> Result<Split<f64>> {
            let mut sequences = build_sequences::<f64>(&layout, count, channels.len(), cfg.seed, offset)?;
            // Quantize through the storage precision so sweep rows compare
            // exactly against the file-mediated eval pipeline.
            for rec in &mut sequences.records {
                rec.symbols = widen(&narrow(&rec.symbols));
                rec.pilot_ref = widen(&narrow(&rec.pilot_ref));
            }
            Ok(Split {
                sequences,
                channels: channels.to_vec(),
            })
        };
        let train_split = make_split(cfg.train_sequences, train_off, &channels_train)?;
        let val_split = make_split(cfg.val_sequences, val_off, &channels_val)?;
        let test_split = make_split(cfg.test_sequences, test_off, &channels_test)?;

        let sliding = SlidingConfig::new(cfg.window_length, len)?;
        let model = ModelParams::<f64>::init(
            4,
            cfg.hidden_size,
            cfg.hidden_layers,
            derive_seed(cfg.seed, domains::NN_INIT, 0),
        );
        let outcome = train(model, &train_split, &val_split, &sliding, &cfg.train_config())?;
        let mut checkpoint = Vec::new();
        write_fnn(&mut checkpoint, &outcome.model)?;
        fs::write(sweep_pilot_model_path(out, np), &checkpoint)?;
        // Evaluate the persisted checkpoint, same as the eval command does.
        let model = read_fnn::<_, f64>(checkpoint.as_slice())?;

        let reports = evaluate(&model, &test_split, &sliding, &cfg.test_snr_db, cfg.seed, None)?;
        for r in &reports {
            println!("density {density} {:>12} @ {:>5} dB: mse {:.6e}", r.estimator, r.snr_db, r.mse);
        }
        rows.extend(
            reports
                .into_iter()
                .map(|r| ("pilot_density".to_string(), density.to_string(), r)),
        );
    }
    write_sweep_csv(&sweep_pilot_path(out), &rows)?;
    println!("wrote {}", sweep_pilot_path(out).display());
    Ok(())
}

/// Channel-tracking trace: a fresh long channel at the trace SNR, exported
/// as per-symbol CSV for the trained model, LS, and MMSE-sim.
pub fn cmd_trace(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let layout = cfg.layout()?;
    let spec = cfg.doppler_spec()?;
    let model = load_model(out)?;
    let blocks = cfg.trace_length / cfg.block_length;
    let trace_layout = layout.with_block_count(blocks)?;
    let channel = generate_channel::<f64>(cfg.trace_length, &spec, derive_seed(cfg.seed, domains::TRACE, 0))?;
    let pbits = pilot_bits(cfg.seed, trace_layout.pilots_per_block());
    let dbits = random_bits(
        2 * trace_layout.data_count_total(),
        derive_seed(cfg.seed, domains::TRACE, 1),
    );
    let frame = assemble_frame::<f64>(&trace_layout, &pbits, &dbits)?;
    let sliding = SlidingConfig::new(cfg.window_length, cfg.trace_length)?;
    let noise = NoiseSpec::from_snr_db(cfg.trace_snr_db);
    let summary = trace_export(
        &model,
        &sliding,
        &channel,
        &frame,
        &noise,
        derive_seed(cfg.seed, domains::TRACE, 2),
        layout.total_length(),
        create(&trace_path(out))?,
    )?;
    println!(
        "trace over {} symbols at {} dB: sbgru mse {:.6e}, ls mse {:.6e}, mmse_sim mse {:.6e}",
        cfg.trace_length, cfg.trace_snr_db, summary.mse_sbgru, summary.mse_ls, summary.mse_mmse_sim
    );
    println!("wrote {}", trace_path(out).display());
    Ok(())
}
