//! Reduction of raw IQ cubes to per-frame, per-antenna amplitude profiles.
//!
//! Each chirp passes through four stages: mean (DC) removal, a normalized
//! forward FFT with the 1/N factor and negative exponent convention,
//! truncation to the N/2 positive-frequency bins with a x2 energy rescale
//! (the inputs are real-valued IF signals, so the negative half mirrors the
//! positive half), and magnitude. Chirps of one frame are then averaged.
//! The combined 1/N and x2 factors make a unit-amplitude tone show up as an
//! amplitude of exactly 1 at its bin.
//!
//! Amplitude tensors are stored in the `RAP1` container: 4-byte ASCII magic,
//! little-endian `u32` frames, antennas, bins, reserved(=0), then one
//! little-endian `f64` per value, frame-major, then antenna, then bin.

use std::path::Path;

use num_complex::Complex64;

use crate::datacube::{AmplitudeTensor, RadarCube};
use crate::error::{Error, Result};

/// A normalized complex spectrum. Only produced by [`fft_normalized`], so
/// the 1/N scaling is guaranteed by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Subtracts the per-chirp mean, zeroing the DC bin of the spectrum.
pub fn remove_dc(chirp: &[Complex64]) -> Vec<Complex64> {
    assert!(!chirp.is_empty(), "remove_dc needs at least one sample");
    let mean = chirp.iter().sum::<Complex64>() / chirp.len() as f64;
    chirp.iter().map(|s| s - mean).collect()
}

/// Forward DFT with negative exponent and 1/N normalization:
/// `bins[k] = (1/N) sum_n input[n] exp(-2 pi i k n / N)`.
///
/// Power-of-two lengths use an iterative radix-2 transform; other lengths
/// fall back to the direct O(N^2) sum.
pub fn fft_normalized(chirp: &[Complex64]) -> Spectrum {
    assert!(
        !chirp.is_empty(),
        "fft_normalized needs at least one sample"
    );
    let mut bins = chirp.to_vec();
    FftPlan::new(chirp.len()).run(&mut bins);
    Spectrum { bins }
}

/// Keeps bins `0..N/2` and doubles them, folding the mirrored negative
/// frequencies of a real input into the retained half. The DC bin stays in
/// place; after [`remove_dc`] it is zero anyway.
pub fn positive_spectrum(spec: &Spectrum) -> Vec<Complex64> {
    let n = spec.bins.len();
    assert!(
        n.is_multiple_of(2),
        "positive_spectrum needs an even bin count"
    );
    spec.bins[..n / 2].iter().map(|&b| b * 2.0).collect()
}

/// Elementwise magnitude.
pub fn amplitude(half_spectrum: &[Complex64]) -> Vec<f64> {
    half_spectrum.iter().map(|c| c.norm()).collect()
}

/// Averages per-chirp amplitude rows, accumulating in chirp order.
pub fn chirp_average(per_chirp: &[Vec<f64>]) -> Vec<f64> {
    assert!(
        !per_chirp.is_empty(),
        "chirp_average needs at least one chirp"
    );
    let bins = per_chirp[0].len();
    assert!(
        per_chirp.iter().all(|row| row.len() == bins),
        "chirp rows must have equal length"
    );
    let mut acc = vec![0.0; bins];
    for row in per_chirp {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let c = per_chirp.len() as f64;
    for a in &mut acc {
        *a /= c;
    }
    acc
}

/// Runs the full per-chirp pipeline over a cube. Bit-identical to composing
/// the stage functions and deterministic across runs; frames are processed
/// independently in index order.
pub fn compute_amplitude_profiles(cube: &RadarCube) -> AmplitudeTensor {
    let cfg = cube.config();
    let n = cfg.num_samples;
    let bins = cfg.num_bins();
    let chirps = cfg.num_chirps as f64;
    let plan = FftPlan::new(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut values = Vec::with_capacity(cube.num_frames() * cfg.num_antennas * bins);
    for f in 0..cube.num_frames() {
        for a in 0..cfg.num_antennas {
            let mut acc = vec![0.0; bins];
            for c in 0..cfg.num_chirps {
                let chirp = cube.chirp(f, a, c);
                let mean = chirp.iter().sum::<Complex64>() / n as f64;
                for (dst, s) in scratch.iter_mut().zip(chirp) {
                    *dst = s - mean;
                }
                plan.run(&mut scratch);
                for (b, slot) in acc.iter_mut().enumerate() {
                    *slot += (scratch[b] * 2.0).norm();
                }
            }
            for slot in &acc {
                values.push(slot / chirps);
            }
        }
    }
    AmplitudeTensor::new(cube.num_frames(), cfg.num_antennas, bins, values)
        .expect("pipeline output is finite and non-negative")
}

struct FftPlan {
    n: usize,
    /// Bit-reversal permutation; empty on the direct-DFT path.
    rev: Vec<u32>,
    /// Roots of unity exp(-2 pi i j / n) for j in 0..n/2.
    twiddles: Vec<Complex64>,
}

impl FftPlan {
    fn new(n: usize) -> Self {
        if !n.is_power_of_two() {
            return FftPlan {
                n,
                rev: Vec::new(),
                twiddles: Vec::new(),
            };
        }
        let bits = n.trailing_zeros();
        let rev = (0..n as u32)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (32 - bits)
                }
            })
            .collect();
        let twiddles = (0..n / 2)
            .map(|j| {
                let angle = -std::f64::consts::TAU * j as f64 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        FftPlan { n, rev, twiddles }
    }

    fn run(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n);
        if self.rev.is_empty() && self.n > 1 {
            self.direct_dft(buf);
            return;
        }
        for (i, &r) in self.rev.iter().enumerate() {
            let r = r as usize;
            if i < r {
                buf.swap(i, r);
            }
        }
        let n = self.n;
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for base in (0..n).step_by(len) {
                for j in 0..half {
                    let w = self.twiddles[j * step];
                    let u = buf[base + j];
                    let v = buf[base + j + half] * w;
                    buf[base + j] = u + v;
                    buf[base + j + half] = u - v;
                }
            }
            len *= 2;
        }
        let scale = 1.0 / n as f64;
        for b in buf {
            *b *= scale;
        }
    }

    fn direct_dft(&self, buf: &mut [Complex64]) {
        let n = self.n;
        let src = buf.to_vec();
        for (k, out) in buf.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, s) in src.iter().enumerate() {
                // reduce k*i mod n before forming the angle
                let r = (k * i) % n;
                let angle = -std::f64::consts::TAU * r as f64 / n as f64;
                acc += s * Complex64::new(angle.cos(), angle.sin());
            }
            *out = acc / n as f64;
        }
    }
}

pub const RAP1_MAGIC: &[u8; 4] = b"RAP1";
pub const RAP1_HEADER_LEN: usize = 20;

/// Writes an amplitude tensor in `RAP1` form.
pub fn write_amplitude_tensor(tensor: &AmplitudeTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let dims = [
        tensor.num_frames(),
        tensor.num_antennas(),
        tensor.num_bins(),
    ];
    if dims.iter().any(|&d| d > u32::MAX as usize) {
        return Err(Error::InvalidConfig {
            reason: "dimension exceeds u32 range of the tensor header".into(),
        });
    }
    let mut buf = Vec::with_capacity(RAP1_HEADER_LEN + tensor.values().len() * 8);
    buf.extend_from_slice(RAP1_MAGIC);
    for d in dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    buf.extend_from_slice(&0u32.to_le_bytes());
    for v in tensor.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads and fully validates an `RAP1` tensor file.
pub fn read_amplitude_tensor(path: impl AsRef<Path>) -> Result<AmplitudeTensor> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 4 || &bytes[0..4] != RAP1_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected: "RAP1",
        });
    }
    if bytes.len() < RAP1_HEADER_LEN {
        return Err(Error::PayloadLengthMismatch {
            path: path.to_path_buf(),
            expected: RAP1_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let dim = |offset: usize| u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap());
    let num_frames = dim(4) as usize;
    let num_antennas = dim(8) as usize;
    let num_bins = dim(12) as usize;
    let reserved = dim(16);
    if reserved != 0 {
        return Err(Error::ReservedNonZero {
            path: path.to_path_buf(),
            found: reserved,
        });
    }
    let count = num_frames
        .checked_mul(num_antennas)
        .and_then(|v| v.checked_mul(num_bins))
        .ok_or_else(|| Error::InvalidConfig {
            reason: "header dimensions overflow".into(),
        })?;
    let expected = RAP1_HEADER_LEN as u64 + count as u64 * 8;
    if bytes.len() as u64 != expected {
        return Err(Error::PayloadLengthMismatch {
            path: path.to_path_buf(),
            expected,
            found: bytes.len() as u64,
        });
    }
    let values = bytes[RAP1_HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    AmplitudeTensor::new(num_frames, num_antennas, num_bins, values)
}
