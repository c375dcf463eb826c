//! Pilot-structured QPSK framing.
//!
//! A frame is K blocks of N symbols; each block carries Np pilot symbols at
//! uniformly spaced in-block positions `{0, N/Np, 2N/Np, ...}` and data
//! symbols elsewhere. The pilot block is identical in every block of every
//! frame, so the receiver-side reference sequence `p` (pilots in place,
//! zeros at data positions) is known ahead of time.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::rng::SeedStream;
use crate::scalar::Real;

/// Block/pilot geometry of a frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameLayout {
    block_length: usize,
    pilots_per_block: usize,
    block_count: usize,
    pilot_positions: Vec<usize>,
}

impl FrameLayout {
    /// Uniformly interleaved layout; requires `pilots_per_block` to divide
    /// `block_length`.
    pub fn new(block_length: usize, pilots_per_block: usize, block_count: usize) -> Result<Self> {
        if block_length == 0 || pilots_per_block == 0 || block_count == 0 {
            return Err(Error::argument("layout dimensions must be positive"));
        }
        if pilots_per_block > block_length {
            return Err(Error::argument(format!(
                "{pilots_per_block} pilots do not fit a block of {block_length}"
            )));
        }
        if block_length % pilots_per_block != 0 {
            return Err(Error::argument(format!(
                "unsupported layout: {pilots_per_block} pilots must divide block length {block_length}"
            )));
        }
        let spacing = block_length / pilots_per_block;
        let pilot_positions = (0..pilots_per_block).map(|i| i * spacing).collect();
        Ok(FrameLayout {
            block_length,
            pilots_per_block,
            block_count,
            pilot_positions,
        })
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn pilots_per_block(&self) -> usize {
        self.pilots_per_block
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// Pilot positions within one block (sorted).
    pub fn pilot_positions(&self) -> &[usize] {
        &self.pilot_positions
    }

    pub fn total_length(&self) -> usize {
        self.block_length * self.block_count
    }

    pub fn data_per_block(&self) -> usize {
        self.block_length - self.pilots_per_block
    }

    pub fn pilot_count_total(&self) -> usize {
        self.pilots_per_block * self.block_count
    }

    pub fn data_count_total(&self) -> usize {
        self.data_per_block() * self.block_count
    }

    pub fn pilot_density(&self) -> f64 {
        self.pilots_per_block as f64 / self.block_length as f64
    }

    /// Whether global position `n` carries a pilot.
    pub fn is_pilot(&self, n: usize) -> bool {
        (n % self.block_length) % (self.block_length / self.pilots_per_block) == 0
    }

    /// Global pilot positions over the whole frame, ascending.
    pub fn global_pilot_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.pilot_count_total());
        for b in 0..self.block_count {
            for &p in &self.pilot_positions {
                out.push(b * self.block_length + p);
            }
        }
        out
    }

    /// Same geometry repeated for a different number of blocks.
    pub fn with_block_count(&self, block_count: usize) -> Result<Self> {
        FrameLayout::new(self.block_length, self.pilots_per_block, block_count)
    }
}

/// A transmitted frame plus its receiver-side pilot reference.
#[derive(Clone, Debug)]
pub struct Frame<T: Real> {
    pub symbols: Vec<Complex<T>>,
    pub pilot_ref: Vec<Complex<T>>,
    pub layout: FrameLayout,
    pub data_bits: Vec<u8>,
}

/// Network input: a 4 x L real matrix with rows re(y), re(p), im(y), im(p).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix<T: Real> {
    data: Vec<T>,
    cols: usize,
}

impl<T: Real> FeatureMatrix<T> {
    pub const ROWS: usize = 4;

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Copies column `t` (4 values) into `out`.
    pub fn col_into(&self, t: usize, out: &mut [T]) {
        for r in 0..Self::ROWS {
            out[r] = self.data[r * self.cols + t];
        }
    }
}

/// Unbiased random bits (0/1), deterministic in the seed.
pub fn random_bits(count: usize, seed: u64) -> Vec<u8> {
    let mut stream = SeedStream::from_seed(seed);
    (0..count).map(|_| stream.bit()).collect()
}

/// Gray-coded QPSK at unit power, two bits per symbol:
/// `00 -> (+1+j)/sqrt2, 01 -> (+1-j)/sqrt2, 11 -> (-1-j)/sqrt2, 10 -> (-1+j)/sqrt2`.
pub fn qpsk_modulate<T: Real>(bits: &[u8]) -> Result<Vec<Complex<T>>> {
    if bits.len() % 2 != 0 {
        return Err(Error::argument(format!("QPSK needs an even bit count, got {}", bits.len())));
    }
    let a = T::from_f64_lossy(std::f64::consts::FRAC_1_SQRT_2);
    Ok(bits
        .chunks_exact(2)
        .map(|pair| {
            let re = if pair[0] == 0 { a } else { -a };
            let im = if pair[1] == 0 { a } else { -a };
            Complex::new(re, im)
        })
        .collect())
}

/// Builds [`FrameLayout`]; alias for [`FrameLayout::new`].
pub fn build_layout(block_length: usize, pilots_per_block: usize, block_count: usize) -> Result<FrameLayout> {
    FrameLayout::new(block_length, pilots_per_block, block_count)
}

/// Assembles a frame: the pilot bits yield exactly Np symbols reused in every
/// block; the data bits yield exactly `K * (N - Np)` symbols filling the
/// remaining positions in order.
pub fn assemble_frame<T: Real>(layout: &FrameLayout, pilot_bits: &[u8], data_bits: &[u8]) -> Result<Frame<T>> {
    if pilot_bits.len() != 2 * layout.pilots_per_block() {
        return Err(Error::argument(format!(
            "expected {} pilot bits, got {}",
            2 * layout.pilots_per_block(),
            pilot_bits.len()
        )));
    }
    if data_bits.len() != 2 * layout.data_count_total() {
        return Err(Error::argument(format!(
            "expected {} data bits, got {}",
            2 * layout.data_count_total(),
            data_bits.len()
        )));
    }
    let pilot_syms = qpsk_modulate::<T>(pilot_bits)?;
    let data_syms = qpsk_modulate::<T>(data_bits)?;

    let total = layout.total_length();
    let zero = Complex::new(T::zero(), T::zero());
    let mut symbols = vec![zero; total];
    let mut pilot_ref = vec![zero; total];

    let mut data_iter = data_syms.into_iter();
    for b in 0..layout.block_count() {
        let base = b * layout.block_length();
        let mut pilot_iter = pilot_syms.iter();
        for off in 0..layout.block_length() {
            let n = base + off;
            if layout.is_pilot(n) {
                let s = *pilot_iter.next().expect("pilot count matches positions");
                symbols[n] = s;
                pilot_ref[n] = s;
            } else {
                symbols[n] = data_iter.next().expect("data count matches positions");
            }
        }
    }

    Ok(Frame {
        symbols,
        pilot_ref,
        layout: layout.clone(),
        data_bits: data_bits.to_vec(),
    })
}

/// Stacks the received sequence and pilot reference into the 4 x L network
/// input `[re(y); re(p); im(y); im(p)]`.
pub fn to_features<T: Real>(y: &[Complex<T>], p: &[Complex<T>]) -> Result<FeatureMatrix<T>> {
    if y.len() != p.len() {
        return Err(Error::argument(format!(
            "received length {} does not match pilot reference length {}",
            y.len(),
            p.len()
        )));
    }
    let cols = y.len();
    let mut data = Vec::with_capacity(4 * cols);
    data.extend(y.iter().map(|v| v.re));
    data.extend(p.iter().map(|v| v.re));
    data.extend(y.iter().map(|v| v.im));
    data.extend(p.iter().map(|v| v.im));
    Ok(FeatureMatrix { data, cols })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn random_bits_basics() {
        assert!(random_bits(0, 1).is_empty());
        assert_eq!(random_bits(64, 9), random_bits(64, 9));
        let bits = random_bits(100_000, 3);
        let ones = bits.iter().map(|&b| b as usize).sum::<usize>();
        let frac = ones as f64 / bits.len() as f64;
        assert!((frac - 0.5).abs() < 0.01, "ones fraction {frac}");
    }

    #[test]
    fn qpsk_mapping_is_the_documented_one() {
        let s = qpsk_modulate::<f64>(&[0, 0, 0, 1, 1, 1, 1, 0]).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(s[0], Complex::new(a, a));
        assert_eq!(s[1], Complex::new(a, -a));
        assert_eq!(s[2], Complex::new(-a, -a));
        assert_eq!(s[3], Complex::new(-a, a));
        assert!(qpsk_modulate::<f64>(&[0]).is_err());
    }

    #[test]
    fn layout_examples() {
        let l = build_layout(16, 8, 10).unwrap();
        assert_eq!(l.total_length(), 160);
        assert_eq!(l.pilot_positions(), &[0, 2, 4, 6, 8, 10, 12, 14]);
        assert!((l.pilot_density() - 0.5).abs() < 1e-15);

        let l = build_layout(16, 4, 10).unwrap();
        assert_eq!(l.pilot_positions(), &[0, 4, 8, 12]);
        assert!((l.pilot_density() - 0.25).abs() < 1e-15);

        let l = build_layout(16, 16, 1).unwrap();
        assert_eq!(l.pilot_positions().len(), 16);
        assert_eq!(l.total_length(), 16);

        assert!(build_layout(16, 5, 10).is_err());
        assert!(build_layout(16, 0, 10).is_err());
    }

    fn demo_frame(np: usize) -> Frame<f64> {
        let layout = build_layout(16, np, 10).unwrap();
        let pilot_bits = random_bits(2 * layout.pilots_per_block(), 11);
        let data_bits = random_bits(2 * layout.data_count_total(), 12);
        assemble_frame(&layout, &pilot_bits, &data_bits).unwrap()
    }

    #[test]
    fn frame_pilot_structure() {
        let f = demo_frame(8);
        let nonzero = f.pilot_ref.iter().filter(|c| c.norm_sqr() > 0.0).count();
        assert_eq!(nonzero, 80);
        // Pilot blocks repeat: block 0 vs block 5 at pilot positions.
        for &p in f.layout.pilot_positions() {
            assert_eq!(f.symbols[p], f.symbols[5 * 16 + p]);
        }
        // pilot_ref equals symbols at pilots and zero elsewhere.
        for n in 0..f.symbols.len() {
            if f.layout.is_pilot(n) {
                assert_eq!(f.pilot_ref[n], f.symbols[n]);
            } else {
                assert_eq!(f.pilot_ref[n].norm_sqr(), 0.0);
            }
        }
        // Unit power everywhere.
        for s in &f.symbols {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_pilot_frame_equals_reference() {
        let layout = build_layout(16, 16, 1).unwrap();
        let pilot_bits = random_bits(32, 5);
        let f: Frame<f64> = assemble_frame(&layout, &pilot_bits, &[]).unwrap();
        assert_eq!(f.symbols, f.pilot_ref);
    }

    #[test]
    fn assemble_frame_rejects_wrong_bit_counts() {
        let layout = build_layout(16, 8, 10).unwrap();
        assert!(assemble_frame::<f64>(&layout, &random_bits(15, 1), &random_bits(160, 2)).is_err());
        assert!(assemble_frame::<f64>(&layout, &random_bits(16, 1), &random_bits(100, 2)).is_err());
    }

    #[test]
    fn features_are_stacked_in_order() {
        let y = [Complex::new(1.0f64, 2.0)];
        let p = [Complex::new(3.0f64, 0.0)];
        let m = to_features(&y, &p).unwrap();
        let mut col = [0.0; 4];
        m.col_into(0, &mut col);
        assert_eq!(col, [1.0, 3.0, 2.0, 0.0]);

        assert!(to_features::<f64>(&y, &[]).is_err());

        let z = [Complex::new(0.0f64, 0.0); 3];
        let m = to_features(&z, &z).unwrap();
        assert!(m.row(0).iter().chain(m.row(1)).chain(m.row(2)).chain(m.row(3)).all(|&v| v == 0.0));
    }

    #[test]
    fn features_round_trip_received() {
        let f = demo_frame(8);
        let y: Vec<_> = f.symbols.iter().map(|s| s * Complex::new(0.4, -0.3)).collect();
        let m = to_features(&y, &f.pilot_ref).unwrap();
        for (t, yn) in y.iter().enumerate() {
            assert_eq!(m.row(0)[t], yn.re);
            assert_eq!(m.row(2)[t], yn.im);
        }
    }

    /// Nearest-constellation-point demapper, used only to check that the
    /// modulation mapping is self-consistent.
    fn qpsk_demap(s: Complex<f64>) -> [u8; 2] {
        [if s.re < 0.0 { 1 } else { 0 }, if s.im < 0.0 { 1 } else { 0 }]
    }

    proptest! {
        #[test]
        fn qpsk_demap_inverts_modulation(bits in proptest::collection::vec(0u8..2, 0..64)) {
            prop_assume!(bits.len() % 2 == 0);
            let syms = qpsk_modulate::<f64>(&bits).unwrap();
            let mut recovered = Vec::new();
            for s in syms {
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
                recovered.extend_from_slice(&qpsk_demap(s));
            }
            prop_assert_eq!(recovered, bits);
        }

        #[test]
        fn pilot_count_matches_layout(np_pow in 0usize..5, k in 1usize..8) {
            let np = 1usize << np_pow; // divisors of 16
            let layout = build_layout(16, np, k).unwrap();
            let pilot_bits = random_bits(2 * np, 1);
            let data_bits = random_bits(2 * layout.data_count_total(), 2);
            let f: Frame<f64> = assemble_frame(&layout, &pilot_bits, &data_bits).unwrap();
            let nonzero = f.pilot_ref.iter().filter(|c| c.norm_sqr() > 0.0).count();
            prop_assert_eq!(nonzero, k * np);
            prop_assert_eq!(layout.global_pilot_positions().len(), k * np);
        }
    }
}
