//! Radar data cube, temperature log, and amplitude tensor types plus the
//! on-disk cube format.
//!
//! Cubes are stored in the `RDC1` container: 4-byte ASCII magic, five
//! little-endian `u32` header fields (frames, antennas, chirps, samples,
//! reserved = 0; 24 bytes total), then one little-endian `f32` I/Q pair per
//! sample, ordered frame-major, then antenna, chirp, sample. Samples are
//! `f32` on disk to keep long captures compact and are widened to `f64` for
//! all in-memory arithmetic. Band-edge frequencies are acquisition metadata
//! and are not stored in the file.
//!
//! Temperature logs are CSV files with header `frame,temp_c` and contiguous
//! ascending frame indices starting at 0.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kv::KvFile;

pub const RDC1_MAGIC: &[u8; 4] = b"RDC1";
pub const RDC1_HEADER_LEN: usize = 24;

/// Acquisition parameters of one capture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarConfig {
    pub start_freq_hz: f64,
    pub end_freq_hz: f64,
    pub num_antennas: usize,
    pub num_chirps: usize,
    pub num_samples: usize,
}

impl Default for RadarConfig {
    /// 58-63.5 GHz sweep, 3 antennas, 2 chirps of 32 samples.
    fn default() -> Self {
        RadarConfig {
            start_freq_hz: 58.0e9,
            end_freq_hz: 63.5e9,
            num_antennas: 3,
            num_chirps: 2,
            num_samples: 32,
        }
    }
}

impl RadarConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidConfig { reason });
        if !self.start_freq_hz.is_finite() || !self.end_freq_hz.is_finite() {
            return fail("band edges must be finite".into());
        }
        if self.end_freq_hz <= self.start_freq_hz {
            return fail(format!(
                "end_freq_hz ({}) must exceed start_freq_hz ({})",
                self.end_freq_hz, self.start_freq_hz
            ));
        }
        if self.num_antennas < 1 {
            return fail("num_antennas must be at least 1".into());
        }
        if self.num_chirps < 1 {
            return fail("num_chirps must be at least 1".into());
        }
        if self.num_samples < 2 || !self.num_samples.is_multiple_of(2) {
            return fail(format!(
                "num_samples must be even and at least 2, got {}",
                self.num_samples
            ));
        }
        Ok(())
    }

    /// Number of positive-spectrum range bins, N/2.
    pub fn num_bins(&self) -> usize {
        self.num_samples / 2
    }

    fn samples_per_frame(&self) -> usize {
        self.num_antennas * self.num_chirps * self.num_samples
    }
}

/// Complex IQ samples indexed `[frame][antenna][chirp][sample]`, stored flat
/// in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarCube {
    config: RadarConfig,
    num_frames: usize,
    samples: Vec<Complex64>,
}

impl RadarCube {
    pub fn new(config: RadarConfig, num_frames: usize, samples: Vec<Complex64>) -> Result<Self> {
        config.validate()?;
        let expected = num_frames
            .checked_mul(config.samples_per_frame())
            .ok_or_else(|| Error::InvalidConfig {
                reason: "sample count overflows".into(),
            })?;
        if samples.len() != expected {
            return Err(Error::DimensionMismatch {
                reason: format!(
                    "cube holds {} samples, dimensions imply {expected}",
                    samples.len()
                ),
            });
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.re.is_finite() || !s.im.is_finite() {
                let n = config.num_samples;
                let c = config.num_chirps;
                let a = config.num_antennas;
                return Err(Error::NonFinite {
                    context: format!(
                        "cube sample [f={}, a={}, c={}, n={}]",
                        i / (n * c * a),
                        i / (n * c) % a,
                        i / n % c,
                        i % n
                    ),
                });
            }
        }
        Ok(RadarCube {
            config,
            num_frames,
            samples,
        })
    }

    pub fn config(&self) -> &RadarConfig {
        &self.config
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// The N samples of one chirp.
    pub fn chirp(&self, frame: usize, antenna: usize, chirp: usize) -> &[Complex64] {
        assert!(frame < self.num_frames && antenna < self.config.num_antennas);
        assert!(chirp < self.config.num_chirps);
        let n = self.config.num_samples;
        let start =
            ((frame * self.config.num_antennas + antenna) * self.config.num_chirps + chirp) * n;
        &self.samples[start..start + n]
    }
}

/// Per-frame internal sensor temperatures in degrees Celsius.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureLog {
    temps: Vec<f64>,
}

impl TemperatureLog {
    pub fn new(temps: Vec<f64>) -> Result<Self> {
        for (i, t) in temps.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("temperature at frame {i}"),
                });
            }
        }
        Ok(TemperatureLog { temps })
    }

    pub fn len(&self) -> usize {
        self.temps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temps.is_empty()
    }

    pub fn temps(&self) -> &[f64] {
        &self.temps
    }

    pub fn get(&self, frame: usize) -> f64 {
        self.temps[frame]
    }

    pub fn slice(&self, start: usize, end: usize) -> TemperatureLog {
        TemperatureLog {
            temps: self.temps[start..end].to_vec(),
        }
    }
}

/// Per-frame, per-antenna amplitude profiles indexed `[frame][antenna][bin]`.
/// All values are finite and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTensor {
    num_frames: usize,
    num_antennas: usize,
    num_bins: usize,
    values: Vec<f64>,
}

impl AmplitudeTensor {
    pub fn new(
        num_frames: usize,
        num_antennas: usize,
        num_bins: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if num_antennas < 1 || num_bins < 1 {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "amplitude tensor needs at least one antenna and one bin, got {num_antennas} x {num_bins}"
                ),
            });
        }
        let expected = num_frames
            .checked_mul(num_antennas)
            .and_then(|v| v.checked_mul(num_bins))
            .ok_or_else(|| Error::InvalidConfig {
                reason: "value count overflows".into(),
            })?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                reason: format!(
                    "tensor holds {} values, dimensions imply {expected}",
                    values.len()
                ),
            });
        }
        for (i, v) in values.iter().enumerate() {
            let context = || {
                format!(
                    "amplitude [f={}, a={}, b={}]",
                    i / (num_bins * num_antennas),
                    i / num_bins % num_antennas,
                    i % num_bins
                )
            };
            if !v.is_finite() {
                return Err(Error::NonFinite { context: context() });
            }
            if *v < 0.0 {
                return Err(Error::NegativeAmplitude { context: context() });
            }
        }
        Ok(AmplitudeTensor {
            num_frames,
            num_antennas,
            num_bins,
            values,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, frame: usize, antenna: usize, bin: usize) -> f64 {
        self.values[(frame * self.num_antennas + antenna) * self.num_bins + bin]
    }

    /// One frame/antenna profile of length `num_bins`.
    pub fn profile(&self, frame: usize, antenna: usize) -> &[f64] {
        let start = (frame * self.num_antennas + antenna) * self.num_bins;
        &self.values[start..start + self.num_bins]
    }

    /// Copies frames `start..end` into a new tensor.
    pub fn slice_frames(&self, start: usize, end: usize) -> Result<AmplitudeTensor> {
        if start > end || end > self.num_frames {
            return Err(Error::DimensionMismatch {
                reason: format!("frame slice {start}..{end} outside 0..{}", self.num_frames),
            });
        }
        let stride = self.num_antennas * self.num_bins;
        Ok(AmplitudeTensor {
            num_frames: end - start,
            num_antennas: self.num_antennas,
            num_bins: self.num_bins,
            values: self.values[start * stride..end * stride].to_vec(),
        })
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

/// Reads and fully validates an `RDC1` cube file. Band edges are not stored
/// in the format; the returned config carries the default 58-63.5 GHz band.
pub fn read_cube(path: impl AsRef<Path>) -> Result<RadarCube> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 4 || &bytes[0..4] != RDC1_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected: "RDC1",
        });
    }
    if bytes.len() < RDC1_HEADER_LEN {
        return Err(Error::PayloadLengthMismatch {
            path: path.to_path_buf(),
            expected: RDC1_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let num_frames = read_u32(&bytes, 4) as usize;
    let num_antennas = read_u32(&bytes, 8) as usize;
    let num_chirps = read_u32(&bytes, 12) as usize;
    let num_samples = read_u32(&bytes, 16) as usize;
    let reserved = read_u32(&bytes, 20);
    if reserved != 0 {
        return Err(Error::ReservedNonZero {
            path: path.to_path_buf(),
            found: reserved,
        });
    }
    let config = RadarConfig {
        num_antennas,
        num_chirps,
        num_samples,
        ..RadarConfig::default()
    };
    config.validate()?;
    let count = num_frames
        .checked_mul(config.samples_per_frame())
        .ok_or_else(|| Error::InvalidConfig {
            reason: "header dimensions overflow".into(),
        })?;
    let expected = RDC1_HEADER_LEN as u64 + count as u64 * 8;
    if bytes.len() as u64 != expected {
        return Err(Error::PayloadLengthMismatch {
            path: path.to_path_buf(),
            expected,
            found: bytes.len() as u64,
        });
    }
    let mut samples = Vec::with_capacity(count);
    for pair in bytes[RDC1_HEADER_LEN..].chunks_exact(8) {
        let re = f32::from_le_bytes(pair[0..4].try_into().unwrap());
        let im = f32::from_le_bytes(pair[4..8].try_into().unwrap());
        samples.push(Complex64::new(re as f64, im as f64));
    }
    RadarCube::new(config, num_frames, samples)
}

/// Writes a cube in `RDC1` form. Samples are narrowed to `f32`; values that
/// round-trip through `f32` are preserved exactly.
pub fn write_cube(cube: &RadarCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let cfg = cube.config();
    let dims = [
        cube.num_frames(),
        cfg.num_antennas,
        cfg.num_chirps,
        cfg.num_samples,
    ];
    if dims.iter().any(|&d| d > u32::MAX as usize) {
        return Err(Error::InvalidConfig {
            reason: "dimension exceeds u32 range of the cube header".into(),
        });
    }
    let mut buf = Vec::with_capacity(RDC1_HEADER_LEN + cube.samples().len() * 8);
    buf.extend_from_slice(RDC1_MAGIC);
    for d in dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    buf.extend_from_slice(&0u32.to_le_bytes());
    for s in cube.samples() {
        buf.extend_from_slice(&(s.re as f32).to_le_bytes());
        buf.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

const TEMP_HEADER: &str = "frame,temp_c";

/// Reads a temperature CSV, enforcing contiguous ascending frame indices.
pub fn read_temperature_log(path: impl AsRef<Path>) -> Result<TemperatureLog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == TEMP_HEADER => {}
        _ => {
            return Err(parse_err(1, format!("expected header `{TEMP_HEADER}`")));
        }
    }
    let mut temps = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (frame, temp) = line
            .split_once(',')
            .ok_or_else(|| parse_err(line_no, "expected `frame,temp_c` row".into()))?;
        let frame: usize = frame
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("invalid frame index `{frame}`")))?;
        let expected = temps.len();
        if frame < expected {
            return Err(Error::DuplicateFrameIndex {
                path: path.to_path_buf(),
                expected,
                found: frame,
            });
        }
        if frame > expected {
            return Err(Error::MissingFrameIndex {
                path: path.to_path_buf(),
                expected,
                found: frame,
            });
        }
        let temp: f64 = temp
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("non-numeric temperature `{temp}`")))?;
        if !temp.is_finite() {
            return Err(parse_err(
                line_no,
                format!("non-finite temperature `{temp}`"),
            ));
        }
        temps.push(temp);
    }
    TemperatureLog::new(temps)
}

/// Writes a temperature CSV with shortest round-trip number formatting, so a
/// read-back log is value-identical and a rewrite is byte-identical.
pub fn write_temperature_log(log: &TemperatureLog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(TEMP_HEADER.len() + 1 + log.len() * 12);
    out.push_str(TEMP_HEADER);
    out.push('\n');
    for (frame, temp) in log.temps().iter().enumerate() {
        out.push_str(&format!("{frame},{temp}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Values from a processing config file. Every key is optional; omitted
/// radar fields fall back to [`RadarConfig::default`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub radar: RadarConfig,
    pub train_fraction: Option<f64>,
}

/// Parses a flat `key = value` config file with keys `start_freq_hz`,
/// `end_freq_hz`, `num_antennas`, `num_chirps`, `num_samples`,
/// `train_fraction`.
pub fn read_config_file(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    let mut kv = KvFile::read(path.as_ref())?;
    let mut radar = RadarConfig::default();
    if let Some(v) = kv.take_f64("start_freq_hz")? {
        radar.start_freq_hz = v;
    }
    if let Some(v) = kv.take_f64("end_freq_hz")? {
        radar.end_freq_hz = v;
    }
    if let Some(v) = kv.take_usize("num_antennas")? {
        radar.num_antennas = v;
    }
    if let Some(v) = kv.take_usize("num_chirps")? {
        radar.num_chirps = v;
    }
    if let Some(v) = kv.take_usize("num_samples")? {
        radar.num_samples = v;
    }
    let train_fraction = kv.take_f64("train_fraction")?;
    if let Some(f) = train_fraction {
        if !(f.is_finite() && 0.0 < f && f < 1.0) {
            return Err(Error::TrainFractionOutOfRange { value: f });
        }
    }
    kv.finish()?;
    radar.validate()?;
    Ok(PipelineConfig {
        radar,
        train_fraction,
    })
}
