//! Channel ensemble format ".fch":
//! magic `FCH1` | u32 realization_count | u32 length | f64 normalized_doppler
//! | realization_count * length complex-f32 samples.

use std::io::{Read, Write};

use num_complex::Complex;

use super::{push_complex_f32, read_complex_f32, read_f64, read_magic, read_u32};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FCH1";

/// In-memory image of a ".fch" file (storage precision, f32).
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelFile {
    pub normalized_doppler: f64,
    pub length: u32,
    pub realizations: Vec<Vec<Complex<f32>>>,
}

/// Writes a channel ensemble; all realizations must share `length`.
pub fn write_fch<W: Write>(mut w: W, normalized_doppler: f64, realizations: &[Vec<Complex<f32>>]) -> Result<()> {
    let length = realizations.first().map_or(0, |r| r.len());
    for (i, r) in realizations.iter().enumerate() {
        if r.len() != length {
            return Err(Error::argument(format!("realization {i} length differs")));
        }
    }
    let mut buf = Vec::with_capacity(4 + 4 + 4 + 8 + realizations.len() * length * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(realizations.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(length as u32).to_le_bytes());
    buf.extend_from_slice(&normalized_doppler.to_le_bytes());
    for r in realizations {
        push_complex_f32(&mut buf, r);
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_fch<R: Read>(mut r: R) -> Result<ChannelFile> {
    read_magic(&mut r, MAGIC)?;
    let count = read_u32(&mut r)? as usize;
    let length = read_u32(&mut r)?;
    let normalized_doppler = read_f64(&mut r)?;
    let mut realizations = Vec::with_capacity(count);
    for _ in 0..count {
        realizations.push(read_complex_f32(&mut r, length as usize)?);
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::format("trailing bytes after channel data"));
    }
    Ok(ChannelFile {
        normalized_doppler,
        length,
        realizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_exact() {
        let realizations: Vec<Vec<Complex<f32>>> = (0..3)
            .map(|i| {
                (0..5)
                    .map(|j| Complex::new(i as f32 + j as f32 * 0.5, -(j as f32)))
                    .collect()
            })
            .collect();
        let mut a = Vec::new();
        write_fch(&mut a, 6.93333e-4, &realizations).unwrap();
        let file = read_fch(a.as_slice()).unwrap();
        assert_eq!(file.length, 5);
        assert_eq!(file.realizations, realizations);
        let mut b = Vec::new();
        write_fch(&mut b, file.normalized_doppler, &file.realizations).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let data = b"NOPE\x00\x00\x00\x00".to_vec();
        assert!(read_fch(data.as_slice()).is_err());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let mut a = Vec::new();
        write_fch(&mut a, 0.1, &[vec![Complex::new(1.0f32, 2.0); 4]]).unwrap();
        a.truncate(a.len() - 3);
        assert!(read_fch(a.as_slice()).is_err());
    }
}
