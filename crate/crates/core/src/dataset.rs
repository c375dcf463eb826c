//! Dataset containers shared by the training/evaluation harness and the
//! binary file formats: channel pools and pilot-framed symbol sequences.

use num_complex::Complex;
use rayon::prelude::*;

use crate::channel::{generate_channel, ChannelRealization, DopplerSpec};
use crate::error::{Error, Result};
use crate::framing::{assemble_frame, random_bits, FrameLayout};
use crate::rng::{derive_seed, domains, SeedStream};
use crate::scalar::Real;

/// One transmitted sequence: its symbols, the pilot reference, and the index
/// of the channel (within the split's pool) it is sent over.
#[derive(Clone, Debug)]
pub struct SequenceRecord<T: Real> {
    pub channel_index: u32,
    pub symbols: Vec<Complex<T>>,
    pub pilot_ref: Vec<Complex<T>>,
}

/// All sequences of one split, sharing a frame layout.
#[derive(Clone, Debug)]
pub struct SequenceSet<T: Real> {
    pub layout: FrameLayout,
    pub records: Vec<SequenceRecord<T>>,
}

/// A split's sequences paired with its channel pool.
#[derive(Clone, Debug)]
pub struct Split<T: Real> {
    pub sequences: SequenceSet<T>,
    pub channels: Vec<ChannelRealization<T>>,
}

impl<T: Real> Split<T> {
    /// Validates record/channel consistency (index bounds, equal lengths).
    pub fn validate(&self) -> Result<()> {
        let len = self.sequences.layout.total_length();
        for (i, rec) in self.sequences.records.iter().enumerate() {
            if rec.symbols.len() != len || rec.pilot_ref.len() != len {
                return Err(Error::argument(format!("sequence {i} has wrong length")));
            }
            if rec.channel_index as usize >= self.channels.len() {
                return Err(Error::argument(format!(
                    "sequence {i} references channel {} outside pool of {}",
                    rec.channel_index,
                    self.channels.len()
                )));
            }
        }
        for (i, ch) in self.channels.iter().enumerate() {
            if ch.len() != len {
                return Err(Error::argument(format!("channel {i} has wrong length")));
            }
        }
        Ok(())
    }

    pub fn channel_of(&self, record: &SequenceRecord<T>) -> &ChannelRealization<T> {
        &self.channels[record.channel_index as usize]
    }
}

/// Generates `count` channel realizations seeded by consecutive global
/// indices starting at `first_global_index` (splits stay disjoint by using
/// disjoint index ranges). Parallelized; output independent of partitioning.
pub fn generate_channel_pool<T: Real>(
    count: usize,
    length: usize,
    spec: &DopplerSpec<T>,
    master_seed: u64,
    first_global_index: u64,
) -> Result<Vec<ChannelRealization<T>>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, domains::CHANNEL, first_global_index + i as u64);
            generate_channel(length, spec, seed)
        })
        .collect()
}

/// The dataset-wide pilot bit pattern (constant across splits and frames).
pub fn pilot_bits(master_seed: u64, pilots_per_block: usize) -> Vec<u8> {
    random_bits(2 * pilots_per_block, derive_seed(master_seed, domains::PILOT_BITS, 0))
}

/// Builds `count` frames for one split. Sequence `i` draws its data bits
/// from global sequence index `first_global_index + i` and picks its channel
/// uniformly from `pool_size` entries.
pub fn build_sequences<T: Real>(
    layout: &FrameLayout,
    count: usize,
    pool_size: usize,
    master_seed: u64,
    first_global_index: u64,
) -> Result<SequenceSet<T>> {
    if pool_size == 0 {
        return Err(Error::argument("channel pool must not be empty"));
    }
    let pbits = pilot_bits(master_seed, layout.pilots_per_block());
    let records: Vec<SequenceRecord<T>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let global = first_global_index + i as u64;
            let data_bits = random_bits(
                2 * layout.data_count_total(),
                derive_seed(master_seed, domains::DATA_BITS, global),
            );
            let frame = assemble_frame::<T>(layout, &pbits, &data_bits)?;
            let mut assign = SeedStream::from_seed(derive_seed(master_seed, domains::CHANNEL_ASSIGN, global));
            Ok(SequenceRecord {
                channel_index: assign.below(pool_size as u64) as u32,
                symbols: frame.symbols,
                pilot_ref: frame.pilot_ref,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SequenceSet {
        layout: layout.clone(),
        records,
    })
}
