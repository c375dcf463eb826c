//! `fadelab`: command-line harness for the fading-channel estimation lab.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error (missing or
//! malformed artifacts, I/O), 4 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::ExperimentConfig;
use fadelab_core::error::Error;

#[derive(Parser)]
#[command(name = "fadelab", version, about = "Time-selective fading channel estimation experiments")]
struct Cli {
    /// Configuration file (key = value lines); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides the config file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker thread count; 0 means all cores (overrides the config file).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the train/val/test channel ensembles (.fch).
    GenChannels,
    /// Generate the pilot-framed symbol datasets (.fds) over existing channels.
    GenDataset,
    /// Train the sliding estimator; writes model.fnn and train_log.csv.
    Train,
    /// Evaluate the trained model against LS/MMSE baselines over the SNR grid.
    Eval,
    /// Sweep one experiment axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepAxis,
    },
    /// Export a long channel-tracking trace as CSV.
    Trace,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepAxis {
    WindowLength,
    PilotDensity,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

struct Failure {
    code: u8,
    message: String,
}

fn config_failure(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: format!("configuration error: {e}"),
    }
}

fn run_failure(e: Error) -> Failure {
    match e {
        Error::Numerical(_) => Failure {
            code: EXIT_NUMERICAL,
            message: format!("numerical failure: {e}"),
        },
        other => Failure {
            code: EXIT_DATA,
            message: format!("data error: {other}"),
        },
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_failure(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text).map_err(config_failure)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.display().to_string();
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    cfg.validate().map_err(config_failure)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(config_failure)?;
    }
    let out = PathBuf::from(&cfg.output_dir);
    match cli.command {
        Command::GenChannels => commands::cmd_gen_channels(&cfg, &out),
        Command::GenDataset => commands::cmd_gen_dataset(&cfg, &out),
        Command::Train => commands::cmd_train(&cfg, &out),
        Command::Eval => commands::cmd_eval(&cfg, &out),
        Command::Sweep { axis } => match axis {
            SweepAxis::WindowLength => commands::cmd_sweep_window(&cfg, &out),
            SweepAxis::PilotDensity => commands::cmd_sweep_pilot(&cfg, &out),
        },
        Command::Trace => commands::cmd_trace(&cfg, &out),
    }
    .map_err(run_failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fadelab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
