//! Binary artifact formats. All integers and floats are little-endian;
//! complex samples are stored as interleaved f32 `(re, im)` pairs. Writers
//! and readers round-trip byte-exactly.

mod fch;
mod fds;
mod fnn;

pub use fch::{read_fch, write_fch, ChannelFile};
pub use fds::{read_fds, write_fds, DatasetFile, DatasetRecord};
pub use fnn::{read_fnn, write_fnn};

use std::io::Read;

use crate::error::{Error, Result};

fn read_exact_buf<R: Read>(r: &mut R, len: usize) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_magic<R: Read>(r: &mut R, expect: &[u8; 4]) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != expect {
        return Err(Error::format(format!(
            "bad magic: expected {:?}, found {:?}",
            String::from_utf8_lossy(expect),
            String::from_utf8_lossy(&m)
        )));
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_complex_f32<R: Read>(r: &mut R, count: usize) -> Result<Vec<num_complex::Complex<f32>>> {
    let bytes = read_exact_buf(r, count * 8)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            num_complex::Complex::new(
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            )
        })
        .collect())
}

fn push_complex_f32(out: &mut Vec<u8>, v: &[num_complex::Complex<f32>]) {
    for c in v {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
}
