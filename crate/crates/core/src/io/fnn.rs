//! Model checkpoint format ".fnn":
//! magic `FNN1` | u32 layer_count | tensors | u32 CRC32.
//!
//! Tensors appear in the canonical order of `ModelParams::tensors` (per
//! layer: forward then backward direction, each w_z, b_z, w_r, b_r, w_c,
//! b_c; then head w, b), encoded as u32 rank, rank * u32 dims, then f32
//! little-endian data (row-major). The trailing CRC32 covers every byte from
//! the magic through the last tensor.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::nn::{GruDirParams, Mat, ModelParams};
use crate::scalar::Real;

const MAGIC: &[u8; 4] = b"FNN1";

fn push_tensor(buf: &mut Vec<u8>, dims: &[usize], data: &[f32]) {
    buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

/// Serializes a model checkpoint (samples narrowed to f32).
pub fn write_fnn<W: Write, T: Real>(mut w: W, model: &ModelParams<T>) -> Result<()> {
    model
        .check_shapes()
        .map_err(|e| Error::format(format!("refusing to write malformed model: {e}")))?;
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(model.layer_count() as u32).to_le_bytes());
    let shapes = model.tensor_shapes();
    for (tensor, dims) in model.tensors().into_iter().zip(&shapes) {
        let data: Vec<f32> = tensor.iter().map(|v| v.to_f64_lossy() as f32).collect();
        push_tensor(&mut buf, dims, &data);
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    w.write_all(&buf)?;
    Ok(())
}

struct TensorReader {
    bytes: Vec<u8>,
    pos: usize,
}

impl TensorReader {
    fn next(&mut self) -> Result<(Vec<usize>, Vec<f32>)> {
        let rank = self.u32()? as usize;
        if rank == 0 || rank > 2 {
            return Err(Error::format(format!("unsupported tensor rank {rank}")));
        }
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(self.u32()? as usize);
        }
        let count: usize = dims.iter().product();
        if self.pos + count * 4 > self.bytes.len() {
            return Err(Error::format("tensor data extends past checkpoint end"));
        }
        let data = self.bytes[self.pos..self.pos + count * 4]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        self.pos += count * 4;
        Ok((dims, data))
    }

    fn u32(&mut self) -> Result<u32> {
        if self.pos + 4 > self.bytes.len() {
            return Err(Error::format("checkpoint truncated"));
        }
        let v = u32::from_le_bytes(self.bytes[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }
}

fn dir_from_tensors<T: Real>(tr: &mut TensorReader) -> Result<GruDirParams<T>> {
    let mut mats = Vec::with_capacity(3);
    let mut biases = Vec::with_capacity(3);
    for _ in 0..3 {
        let (wdims, wdata) = tr.next()?;
        if wdims.len() != 2 {
            return Err(Error::format("gate weight tensor must be rank 2"));
        }
        let (bdims, bdata) = tr.next()?;
        if bdims.len() != 1 || bdims[0] != wdims[0] {
            return Err(Error::format("gate bias does not match weight rows"));
        }
        mats.push(Mat::from_vec(
            wdims[0],
            wdims[1],
            wdata.into_iter().map(|v| T::from_f64_lossy(v as f64)).collect(),
        ));
        biases.push(bdata.into_iter().map(|v| T::from_f64_lossy(v as f64)).collect::<Vec<T>>());
    }
    let w_c = mats.pop().expect("three gates");
    let w_r = mats.pop().expect("three gates");
    let w_z = mats.pop().expect("three gates");
    let b_c = biases.pop().expect("three gates");
    let b_r = biases.pop().expect("three gates");
    let b_z = biases.pop().expect("three gates");
    let p = GruDirParams {
        w_z,
        w_r,
        w_c,
        b_z,
        b_r,
        b_c,
    };
    p.check_shapes().map_err(|e| Error::format(format!("bad direction tensors: {e}")))?;
    Ok(p)
}

/// Reads a model checkpoint, validating magic, shapes, and CRC.
pub fn read_fnn<R: Read, T: Real>(mut r: R) -> Result<ModelParams<T>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 12 {
        return Err(Error::format("checkpoint too short"));
    }
    let (payload, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::format(format!(
            "checkpoint CRC mismatch: stored {stored:#010x}, computed {computed:#010x}"
        )));
    }
    if &payload[..4] != MAGIC {
        return Err(Error::format("bad checkpoint magic"));
    }
    let layer_count = u32::from_le_bytes(payload[4..8].try_into().unwrap()) as usize;
    if layer_count == 0 {
        return Err(Error::format("checkpoint has zero layers"));
    }
    let mut tr = TensorReader {
        bytes: payload[8..].to_vec(),
        pos: 0,
    };

    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let fwd = dir_from_tensors::<T>(&mut tr)?;
        let bwd = dir_from_tensors::<T>(&mut tr)?;
        layers.push(crate::nn::BiGruLayerParams { fwd, bwd });
    }
    let (wdims, wdata) = tr.next()?;
    if wdims.len() != 2 {
        return Err(Error::format("head weight tensor must be rank 2"));
    }
    let (bdims, bdata) = tr.next()?;
    if bdims.len() != 1 || bdims[0] != wdims[0] {
        return Err(Error::format("head bias does not match head rows"));
    }
    if tr.pos != tr.bytes.len() {
        return Err(Error::format("trailing bytes after head tensors"));
    }

    let model = ModelParams {
        layers,
        head: crate::nn::HeadParams {
            w: Mat::from_vec(
                wdims[0],
                wdims[1],
                wdata.into_iter().map(|v| T::from_f64_lossy(v as f64)).collect(),
            ),
            b: bdata.into_iter().map(|v| T::from_f64_lossy(v as f64)).collect(),
        },
        version: crate::nn::MODEL_VERSION,
    };
    model
        .check_shapes()
        .map_err(|e| Error::format(format!("checkpoint shape chain invalid: {e}")))?;
    Ok(model)
}
