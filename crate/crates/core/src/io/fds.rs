//! Dataset format ".fds":
//! magic `FDS1` | u32 sequence_count | u32 L | u32 N | u32 Np | u32 K |
//! per sequence: u32 channel_index, complex-f32 x[L], complex-f32 p[L].

use std::io::{Read, Write};

use num_complex::Complex;

use super::{push_complex_f32, read_complex_f32, read_magic, read_u32};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FDS1";

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecord {
    pub channel_index: u32,
    pub symbols: Vec<Complex<f32>>,
    pub pilot_ref: Vec<Complex<f32>>,
}

/// In-memory image of a ".fds" file (storage precision, f32).
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetFile {
    pub total_length: u32,
    pub block_length: u32,
    pub pilots_per_block: u32,
    pub block_count: u32,
    pub records: Vec<DatasetRecord>,
}

pub fn write_fds<W: Write>(mut w: W, file: &DatasetFile) -> Result<()> {
    let l = file.total_length as usize;
    if file.block_length.checked_mul(file.block_count) != Some(file.total_length) {
        return Err(Error::argument("layout fields inconsistent with total length"));
    }
    let mut buf = Vec::with_capacity(24 + file.records.len() * (4 + 16 * l));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(file.records.len() as u32).to_le_bytes());
    buf.extend_from_slice(&file.total_length.to_le_bytes());
    buf.extend_from_slice(&file.block_length.to_le_bytes());
    buf.extend_from_slice(&file.pilots_per_block.to_le_bytes());
    buf.extend_from_slice(&file.block_count.to_le_bytes());
    for (i, rec) in file.records.iter().enumerate() {
        if rec.symbols.len() != l || rec.pilot_ref.len() != l {
            return Err(Error::argument(format!("record {i} has wrong length")));
        }
        buf.extend_from_slice(&rec.channel_index.to_le_bytes());
        push_complex_f32(&mut buf, &rec.symbols);
        push_complex_f32(&mut buf, &rec.pilot_ref);
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_fds<R: Read>(mut r: R) -> Result<DatasetFile> {
    read_magic(&mut r, MAGIC)?;
    let count = read_u32(&mut r)? as usize;
    let total_length = read_u32(&mut r)?;
    let block_length = read_u32(&mut r)?;
    let pilots_per_block = read_u32(&mut r)?;
    let block_count = read_u32(&mut r)?;
    if block_length.checked_mul(block_count) != Some(total_length) {
        return Err(Error::format("layout fields inconsistent with total length"));
    }
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let channel_index = read_u32(&mut r)?;
        let symbols = read_complex_f32(&mut r, total_length as usize)?;
        let pilot_ref = read_complex_f32(&mut r, total_length as usize)?;
        records.push(DatasetRecord {
            channel_index,
            symbols,
            pilot_ref,
        });
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::format("trailing bytes after dataset records"));
    }
    Ok(DatasetFile {
        total_length,
        block_length,
        pilots_per_block,
        block_count,
        records,
    })
}
