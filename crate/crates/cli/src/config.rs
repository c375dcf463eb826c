//! Experiment configuration: a plain-text `key = value` file with `#`
//! comments. Unknown and duplicate keys are rejected; missing keys fall back
//! to the desk-scale defaults. Parse -> serialize -> parse is the identity.

use std::collections::HashSet;
use std::fmt::Write as _;

use fadelab_core::channel::DopplerSpec;
use fadelab_core::error::{Error, Result};
use fadelab_core::framing::FrameLayout;
use fadelab_core::sbgru::TrainConfig;

/// All experiment knobs. Defaults reproduce the desk-scale experiment grid
/// (a 1:10 scale of the full setup, preserving the 4:1:1 channel and 10:1:1
/// sequence split ratios).
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub carrier_frequency_hz: f64,
    pub receiver_speed_mps: f64,
    pub sampling_rate_hz: f64,
    pub block_length: usize,
    pub pilots_per_block: usize,
    pub block_count: usize,
    pub hidden_size: usize,
    pub hidden_layers: usize,
    pub window_length: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub train_snr_db: f64,
    pub epochs: usize,
    pub train_channels: usize,
    pub val_channels: usize,
    pub test_channels: usize,
    pub train_sequences: usize,
    pub val_sequences: usize,
    pub test_sequences: usize,
    pub test_snr_db: Vec<f64>,
    pub window_length_list: Vec<usize>,
    pub pilot_density_list: Vec<f64>,
    pub trace_length: usize,
    pub trace_snr_db: f64,
    pub output_dir: String,
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            carrier_frequency_hz: 5.2e9,
            receiver_speed_mps: 10.0,
            sampling_rate_hz: 0.25e6,
            block_length: 16,
            pilots_per_block: 8,
            block_count: 10,
            hidden_size: 40,
            hidden_layers: 2,
            window_length: 40,
            learning_rate: 0.001,
            batch_size: 128,
            train_snr_db: 20.0,
            epochs: 10,
            train_channels: 120,
            val_channels: 30,
            test_channels: 30,
            train_sequences: 10_000,
            val_sequences: 1_000,
            test_sequences: 1_000,
            test_snr_db: vec![5.0, 10.0, 15.0, 20.0, 25.0],
            window_length_list: vec![16, 24, 32, 40],
            pilot_density_list: vec![0.5, 0.25],
            trace_length: 4_000,
            trace_snr_db: 20.0,
            output_dir: "out".to_string(),
            threads: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::argument(format!("config key '{key}': cannot parse '{value}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|item| parse_num(key, item.trim())).collect()
}

impl ExperimentConfig {
    /// Parses the documented `key = value` format. Unknown or repeated keys
    /// are errors; keys not present keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(idx) => &raw[..idx],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::argument(format!("config line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::argument(format!("config key '{key}' given twice")));
            }
            match key {
                "seed" => cfg.seed = parse_num(key, value)?,
                "carrier_frequency_hz" => cfg.carrier_frequency_hz = parse_num(key, value)?,
                "receiver_speed_mps" => cfg.receiver_speed_mps = parse_num(key, value)?,
                "sampling_rate_hz" => cfg.sampling_rate_hz = parse_num(key, value)?,
                "block_length" => cfg.block_length = parse_num(key, value)?,
                "pilots_per_block" => cfg.pilots_per_block = parse_num(key, value)?,
                "block_count" => cfg.block_count = parse_num(key, value)?,
                "hidden_size" => cfg.hidden_size = parse_num(key, value)?,
                "hidden_layers" => cfg.hidden_layers = parse_num(key, value)?,
                "window_length" => cfg.window_length = parse_num(key, value)?,
                "learning_rate" => cfg.learning_rate = parse_num(key, value)?,
                "batch_size" => cfg.batch_size = parse_num(key, value)?,
                "train_snr_db" => cfg.train_snr_db = parse_num(key, value)?,
                "epochs" => cfg.epochs = parse_num(key, value)?,
                "train_channels" => cfg.train_channels = parse_num(key, value)?,
                "val_channels" => cfg.val_channels = parse_num(key, value)?,
                "test_channels" => cfg.test_channels = parse_num(key, value)?,
                "train_sequences" => cfg.train_sequences = parse_num(key, value)?,
                "val_sequences" => cfg.val_sequences = parse_num(key, value)?,
                "test_sequences" => cfg.test_sequences = parse_num(key, value)?,
                "test_snr_db" => cfg.test_snr_db = parse_list(key, value)?,
                "window_length_list" => cfg.window_length_list = parse_list(key, value)?,
                "pilot_density_list" => cfg.pilot_density_list = parse_list(key, value)?,
                "trace_length" => cfg.trace_length = parse_num(key, value)?,
                "trace_snr_db" => cfg.trace_snr_db = parse_num(key, value)?,
                "output_dir" => cfg.output_dir = value.to_string(),
                "threads" => cfg.threads = parse_num(key, value)?,
                _ => return Err(Error::argument(format!("unknown config key '{key}'"))),
            }
        }
        Ok(cfg)
    }

    /// Canonical serialization; every key is written.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let join_f = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let join_u = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "carrier_frequency_hz = {}", self.carrier_frequency_hz);
        let _ = writeln!(s, "receiver_speed_mps = {}", self.receiver_speed_mps);
        let _ = writeln!(s, "sampling_rate_hz = {}", self.sampling_rate_hz);
        let _ = writeln!(s, "block_length = {}", self.block_length);
        let _ = writeln!(s, "pilots_per_block = {}", self.pilots_per_block);
        let _ = writeln!(s, "block_count = {}", self.block_count);
        let _ = writeln!(s, "hidden_size = {}", self.hidden_size);
        let _ = writeln!(s, "hidden_layers = {}", self.hidden_layers);
        let _ = writeln!(s, "window_length = {}", self.window_length);
        let _ = writeln!(s, "learning_rate = {}", self.learning_rate);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "train_snr_db = {}", self.train_snr_db);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "train_channels = {}", self.train_channels);
        let _ = writeln!(s, "val_channels = {}", self.val_channels);
        let _ = writeln!(s, "test_channels = {}", self.test_channels);
        let _ = writeln!(s, "train_sequences = {}", self.train_sequences);
        let _ = writeln!(s, "val_sequences = {}", self.val_sequences);
        let _ = writeln!(s, "test_sequences = {}", self.test_sequences);
        let _ = writeln!(s, "test_snr_db = {}", join_f(&self.test_snr_db));
        let _ = writeln!(s, "window_length_list = {}", join_u(&self.window_length_list));
        let _ = writeln!(s, "pilot_density_list = {}", join_f(&self.pilot_density_list));
        let _ = writeln!(s, "trace_length = {}", self.trace_length);
        let _ = writeln!(s, "trace_snr_db = {}", self.trace_snr_db);
        let _ = writeln!(s, "output_dir = {}", self.output_dir);
        let _ = writeln!(s, "threads = {}", self.threads);
        s
    }

    /// Full upfront validation: everything derivable must construct. Any
    /// failure here is a configuration error (exit code 2).
    pub fn validate(&self) -> Result<()> {
        self.doppler_spec()?;
        let layout = self.layout()?;
        let len = layout.total_length();
        if self.window_length == 0 || self.window_length > len {
            return Err(Error::argument(format!(
                "window_length {} must be in 1..={len}",
                self.window_length
            )));
        }
        if self.hidden_size == 0 || self.hidden_layers == 0 {
            return Err(Error::argument("hidden_size and hidden_layers must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::argument("learning_rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::argument("batch_size must be positive"));
        }
        for count in [
            self.train_channels,
            self.val_channels,
            self.test_channels,
            self.train_sequences,
            self.val_sequences,
            self.test_sequences,
        ] {
            if count == 0 {
                return Err(Error::argument("channel/sequence counts must be at least 1"));
            }
        }
        if self.test_snr_db.is_empty() {
            return Err(Error::argument("test_snr_db must list at least one SNR"));
        }
        if self.window_length_list.is_empty() {
            return Err(Error::argument("window_length_list must be nonempty"));
        }
        for &w in &self.window_length_list {
            if w == 0 || w > len {
                return Err(Error::argument(format!("window_length_list entry {w} must be in 1..={len}")));
            }
            if w > self.window_length {
                return Err(Error::argument(format!(
                    "window_length_list entry {w} exceeds the training window {}",
                    self.window_length
                )));
            }
        }
        if self.pilot_density_list.is_empty() {
            return Err(Error::argument("pilot_density_list must be nonempty"));
        }
        for &d in &self.pilot_density_list {
            self.pilots_for_density(d)?;
        }
        if self.trace_length == 0 || self.trace_length % self.block_length != 0 {
            return Err(Error::argument(format!(
                "trace_length {} must be a positive multiple of block_length {}",
                self.trace_length, self.block_length
            )));
        }
        if self.trace_length % len != 0 {
            return Err(Error::argument(format!(
                "trace_length {} must be a multiple of the frame length {len}",
                self.trace_length
            )));
        }
        if self.window_length > self.trace_length {
            return Err(Error::argument("window_length exceeds trace_length"));
        }
        Ok(())
    }

    pub fn doppler_spec(&self) -> Result<DopplerSpec<f64>> {
        DopplerSpec::new(self.carrier_frequency_hz, self.receiver_speed_mps, self.sampling_rate_hz)
    }

    pub fn layout(&self) -> Result<FrameLayout> {
        FrameLayout::new(self.block_length, self.pilots_per_block, self.block_count)
    }

    /// Pilot count for a density value; the density must correspond to an
    /// integer pilot count that divides the block length.
    pub fn pilots_for_density(&self, density: f64) -> Result<usize> {
        let np = density * self.block_length as f64;
        let rounded = np.round();
        if !(rounded >= 1.0) || (np - rounded).abs() > 1e-9 {
            return Err(Error::argument(format!(
                "pilot density {density} does not give an integer pilot count for block length {}",
                self.block_length
            )));
        }
        let np = rounded as usize;
        if self.block_length % np != 0 {
            return Err(Error::argument(format!(
                "pilot density {density} gives {np} pilots, which does not divide block length {}",
                self.block_length
            )));
        }
        Ok(np)
    }

    pub fn train_config(&self) -> TrainConfig<f64> {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            train_snr_db: self.train_snr_db,
            epochs: self.epochs,
            seed: self.seed,
        }
    }

    /// Global channel index offsets per split (seed partitioning).
    pub fn channel_offsets(&self) -> (u64, u64, u64) {
        (
            0,
            self.train_channels as u64,
            (self.train_channels + self.val_channels) as u64,
        )
    }

    /// Global sequence index offsets per split (seed partitioning).
    pub fn sequence_offsets(&self) -> (u64, u64, u64) {
        (
            0,
            self.train_sequences as u64,
            (self.train_sequences + self.val_sequences) as u64,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_validates() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = ExperimentConfig::default();
        let text = cfg.serialize();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.serialize(), text);
    }

    #[test]
    fn partial_configs_override_defaults() {
        let cfg = ExperimentConfig::parse("epochs = 3\n# comment\ntest_snr_db = 10, 20\n").unwrap();
        assert_eq!(cfg.epochs, 3);
        assert_eq!(cfg.test_snr_db, vec![10.0, 20.0]);
        assert_eq!(cfg.block_length, 16);
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        assert!(ExperimentConfig::parse("wat = 1\n").is_err());
        assert!(ExperimentConfig::parse("epochs = 1\nepochs = 2\n").is_err());
        assert!(ExperimentConfig::parse("epochs\n").is_err());
        assert!(ExperimentConfig::parse("epochs = x\n").is_err());
    }

    #[test]
    fn invalid_derived_values_fail_validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.pilots_per_block = 5; // does not divide 16
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.window_length = 300; // exceeds L = 160
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.pilot_density_list = vec![0.3]; // 4.8 pilots
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.trace_length = 4001;
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.receiver_speed_mps = 0.0; // phi_d = 0
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn density_to_pilot_count() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.pilots_for_density(0.5).unwrap(), 8);
        assert_eq!(cfg.pilots_for_density(0.25).unwrap(), 4);
        assert_eq!(cfg.pilots_for_density(1.0).unwrap(), 16);
        assert!(cfg.pilots_for_density(0.3).is_err());
    }
}
