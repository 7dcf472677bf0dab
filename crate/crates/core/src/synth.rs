//! Synthetic cube and temperature-log generation with a known injected
//! drift, used as ground truth for end-to-end verification.
//!
//! The signal model is a single complex tone at `target_bin` whose emitted
//! amplitude is `gain(T) * tone_amplitude / 2` with `gain(T) = alpha +
//! beta * T` per antenna. The halved emitted amplitude compensates the x2
//! positive-spectrum rescale later in the pipeline, so the processed
//! amplitude profile at the target bin equals `gain(T) * tone_amplitude`
//! exactly in the noiseless case. Complex white Gaussian noise is scaled
//! per frame and antenna so the per-sample tone-to-noise power ratio equals
//! `snr_db`; `snr_db = inf` disables noise.
//!
//! All randomness is ChaCha12 keyed by `seed` (expanded through the
//! splitmix64-based `seed_from_u64`). Temperatures draw from stream 0 and
//! frame `f` draws from stream `f + 1`, so frames can be generated in any
//! order, or in parallel, with bit-identical results.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::datacube::{RadarConfig, RadarCube, TemperatureLog};
use crate::error::{Error, Result};
use crate::kv::KvFile;

/// Linear per-antenna gain law `gain(T) = alpha + beta * T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaDrift {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftLaw {
    antennas: Vec<AntennaDrift>,
}

impl DriftLaw {
    pub fn new(antennas: Vec<AntennaDrift>) -> Result<Self> {
        if antennas.is_empty() {
            return Err(Error::InvalidSynthSpec {
                reason: "drift law needs at least one antenna".into(),
            });
        }
        for (a, d) in antennas.iter().enumerate() {
            if !d.alpha.is_finite() || !d.beta.is_finite() {
                return Err(Error::InvalidSynthSpec {
                    reason: format!("drift law for antenna {a} must be finite"),
                });
            }
        }
        Ok(DriftLaw { antennas })
    }

    pub fn num_antennas(&self) -> usize {
        self.antennas.len()
    }

    pub fn antenna(&self, a: usize) -> AntennaDrift {
        self.antennas[a]
    }

    pub fn gain(&self, antenna: usize, temp_c: f64) -> f64 {
        let d = self.antennas[antenna];
        d.alpha + d.beta * temp_c
    }
}

/// Temperature trajectory over frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TempProfile {
    /// Exact linear interpolation from `t_start` to `t_end`.
    Ramp { t_start: f64, t_end: f64 },
    /// `mean + amplitude * sin(2 pi f / period_frames)`: starts at the mean,
    /// rising.
    Sinusoid {
        mean: f64,
        amplitude: f64,
        period_frames: usize,
    },
    /// Gaussian steps of `step_sigma`, clamped into `[clamp_min, clamp_max]`.
    RandomWalk {
        start: f64,
        step_sigma: f64,
        clamp_min: f64,
        clamp_max: f64,
    },
}

impl fmt::Display for TempProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TempProfile::Ramp { t_start, t_end } => write!(f, "ramp({t_start},{t_end})"),
            TempProfile::Sinusoid {
                mean,
                amplitude,
                period_frames,
            } => write!(f, "sinusoid({mean},{amplitude},{period_frames})"),
            TempProfile::RandomWalk {
                start,
                step_sigma,
                clamp_min,
                clamp_max,
            } => write!(
                f,
                "random_walk({start},{step_sigma},{clamp_min},{clamp_max})"
            ),
        }
    }
}

/// Full description of one synthetic capture.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub config: RadarConfig,
    pub num_frames: usize,
    pub target_bin: usize,
    pub tone_amplitude: f64,
    pub drift: DriftLaw,
    pub temp_profile: TempProfile,
    /// Per-sample tone-to-noise power ratio in dB; `f64::INFINITY` turns
    /// noise off.
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    /// Three antennas with mixed-sign drift slopes (+, -, -), gains
    /// normalized to 1 at 37.5 C, a 30-45 C ramp, and 20 dB SNR.
    fn default() -> Self {
        SynthSpec {
            config: RadarConfig::default(),
            num_frames: 5000,
            target_bin: 4,
            tone_amplitude: 0.075,
            drift: DriftLaw::new(vec![
                AntennaDrift {
                    alpha: -0.8,
                    beta: 0.048,
                },
                AntennaDrift {
                    alpha: 2.5,
                    beta: -0.04,
                },
                AntennaDrift {
                    alpha: 2.125,
                    beta: -0.03,
                },
            ])
            .expect("default drift law is valid"),
            temp_profile: TempProfile::Ramp {
                t_start: 30.0,
                t_end: 45.0,
            },
            snr_db: 20.0,
            seed: 7,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Err(Error::InvalidSynthSpec { reason });
        self.config.validate()?;
        if self.target_bin >= self.config.num_bins() {
            return invalid(format!(
                "target_bin {} outside the {} positive-spectrum bins",
                self.target_bin,
                self.config.num_bins()
            ));
        }
        if !self.tone_amplitude.is_finite() || self.tone_amplitude < 0.0 {
            return invalid(format!(
                "tone_amplitude must be finite and non-negative, got {}",
                self.tone_amplitude
            ));
        }
        if self.drift.num_antennas() != self.config.num_antennas {
            return invalid(format!(
                "drift law covers {} antennas, config has {}",
                self.drift.num_antennas(),
                self.config.num_antennas
            ));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return invalid(format!(
                "snr_db must be finite or +inf, got {}",
                self.snr_db
            ));
        }
        match self.temp_profile {
            TempProfile::Ramp { t_start, t_end } => {
                if !t_start.is_finite() || !t_end.is_finite() {
                    return invalid("ramp endpoints must be finite".into());
                }
            }
            TempProfile::Sinusoid {
                mean,
                amplitude,
                period_frames,
            } => {
                if !mean.is_finite() || !amplitude.is_finite() {
                    return invalid("sinusoid parameters must be finite".into());
                }
                if period_frames == 0 {
                    return invalid("sinusoid period must be at least one frame".into());
                }
            }
            TempProfile::RandomWalk {
                start,
                step_sigma,
                clamp_min,
                clamp_max,
            } => {
                if !start.is_finite() || !step_sigma.is_finite() || step_sigma < 0.0 {
                    return invalid("random walk needs finite start and non-negative sigma".into());
                }
                if !(clamp_min.is_finite() && clamp_max.is_finite() && clamp_min <= clamp_max) {
                    return invalid("random walk clamp range is empty or non-finite".into());
                }
            }
        }
        Ok(())
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Produces the per-frame temperature log for a spec. Deterministic in
/// (seed, profile, num_frames).
pub fn generate_temperatures(spec: &SynthSpec) -> Result<TemperatureLog> {
    spec.validate()?;
    let f_count = spec.num_frames;
    let temps = match spec.temp_profile {
        TempProfile::Ramp { t_start, t_end } => (0..f_count)
            .map(|f| {
                if f_count == 1 {
                    t_start
                } else {
                    t_start + (t_end - t_start) * f as f64 / (f_count - 1) as f64
                }
            })
            .collect(),
        TempProfile::Sinusoid {
            mean,
            amplitude,
            period_frames,
        } => (0..f_count)
            .map(|f| {
                mean + amplitude * (std::f64::consts::TAU * f as f64 / period_frames as f64).sin()
            })
            .collect(),
        TempProfile::RandomWalk {
            start,
            step_sigma,
            clamp_min,
            clamp_max,
        } => {
            let mut rng = stream_rng(spec.seed, 0);
            let mut t = start.clamp(clamp_min, clamp_max);
            let mut temps = Vec::with_capacity(f_count);
            for _ in 0..f_count {
                temps.push(t);
                let step: f64 = rng.sample(StandardNormal);
                t = (t + step_sigma * step).clamp(clamp_min, clamp_max);
            }
            temps
        }
    };
    TemperatureLog::new(temps)
}

/// Builds the IQ cube for a spec and its temperature log. Frame `f` draws
/// noise from its own PRNG stream, so output is independent of generation
/// order.
pub fn generate_cube(spec: &SynthSpec, temps: &TemperatureLog) -> Result<RadarCube> {
    spec.validate()?;
    if temps.len() != spec.num_frames {
        return Err(Error::FrameCountMismatch {
            left: "synthesis spec",
            left_frames: spec.num_frames,
            right: "temperature log",
            right_frames: temps.len(),
        });
    }
    let cfg = spec.config;
    for f in 0..spec.num_frames {
        let t = temps.get(f);
        for a in 0..cfg.num_antennas {
            let gain = spec.drift.gain(a, t);
            if gain <= 0.0 {
                return Err(Error::NonPositiveGain {
                    antenna: a,
                    temp_c: t,
                    gain,
                });
            }
        }
    }

    let n = cfg.num_samples;
    let tone: Vec<Complex64> = (0..n)
        .map(|i| {
            let angle = std::f64::consts::TAU * spec.target_bin as f64 * i as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect();
    let noisy = spec.snr_db.is_finite();
    // per-component std = emitted amplitude / sqrt(2 * snr_linear)
    let noise_factor = if noisy {
        1.0 / (2.0 * 10f64.powf(spec.snr_db / 10.0)).sqrt()
    } else {
        0.0
    };

    let mut samples = Vec::with_capacity(spec.num_frames * cfg.num_antennas * cfg.num_chirps * n);
    for f in 0..spec.num_frames {
        let t = temps.get(f);
        let mut rng = noisy.then(|| stream_rng(spec.seed, f as u64 + 1));
        for a in 0..cfg.num_antennas {
            let emitted = spec.drift.gain(a, t) * spec.tone_amplitude / 2.0;
            let sigma = emitted * noise_factor;
            for _ in 0..cfg.num_chirps {
                for &e in &tone {
                    let mut s = e * emitted;
                    if let Some(rng) = rng.as_mut() {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        s += Complex64::new(re * sigma, im * sigma);
                    }
                    samples.push(s);
                }
            }
        }
    }
    RadarCube::new(cfg, spec.num_frames, samples)
}

/// A single complex tone `amplitude * exp(+2 pi i bin n / N)`, the
/// generator's per-chirp signal shape.
pub fn complex_tone_chirp(num_samples: usize, bin: usize, amplitude: f64) -> Vec<Complex64> {
    (0..num_samples)
        .map(|i| {
            let angle = std::f64::consts::TAU * bin as f64 * i as f64 / num_samples as f64;
            Complex64::new(amplitude * angle.cos(), amplitude * angle.sin())
        })
        .collect()
}

/// A real cosine `amplitude * cos(2 pi bin n / N)`, matching real-valued IF
/// captures; its processed amplitude at `bin` equals `amplitude`.
pub fn cosine_chirp(num_samples: usize, bin: usize, amplitude: f64) -> Vec<Complex64> {
    (0..num_samples)
        .map(|i| {
            let angle = std::f64::consts::TAU * bin as f64 * i as f64 / num_samples as f64;
            Complex64::new(amplitude * angle.cos(), 0.0)
        })
        .collect()
}

/// Parses a synthesis spec from flat `key = value` text. Keys mirror the
/// [`SynthSpec`] fields: `start_freq_hz`, `end_freq_hz`, `num_antennas`,
/// `num_chirps`, `num_samples`, `num_frames`, `target_bin`,
/// `tone_amplitude`, `alpha_0..`, `beta_0..`, `temp_profile`, `snr_db`,
/// `seed`. Every key is optional and defaults to [`SynthSpec::default`];
/// per-antenna `alpha_i`/`beta_i` must be given for all antennas once the
/// antenna count departs from the default.
pub fn read_synth_spec(path: impl AsRef<Path>) -> Result<SynthSpec> {
    let mut kv = KvFile::read(path.as_ref())?;
    let mut spec = SynthSpec::default();
    if let Some(v) = kv.take_f64("start_freq_hz")? {
        spec.config.start_freq_hz = v;
    }
    if let Some(v) = kv.take_f64("end_freq_hz")? {
        spec.config.end_freq_hz = v;
    }
    if let Some(v) = kv.take_usize("num_antennas")? {
        spec.config.num_antennas = v;
    }
    if let Some(v) = kv.take_usize("num_chirps")? {
        spec.config.num_chirps = v;
    }
    if let Some(v) = kv.take_usize("num_samples")? {
        spec.config.num_samples = v;
    }
    if let Some(v) = kv.take_usize("num_frames")? {
        spec.num_frames = v;
    }
    if let Some(v) = kv.take_usize("target_bin")? {
        spec.target_bin = v;
    }
    if let Some(v) = kv.take_f64("tone_amplitude")? {
        spec.tone_amplitude = v;
    }
    if let Some(v) = kv.take_f64("snr_db")? {
        spec.snr_db = v;
    }
    if let Some(v) = kv.take_u64("seed")? {
        spec.seed = v;
    }

    let antennas = spec.config.num_antennas;
    let mut drift = Vec::with_capacity(antennas);
    let mut any_key = false;
    let mut all_keys = true;
    for a in 0..antennas {
        let alpha = kv.take_f64(&format!("alpha_{a}"))?;
        let beta = kv.take_f64(&format!("beta_{a}"))?;
        any_key |= alpha.is_some() || beta.is_some();
        all_keys &= alpha.is_some() && beta.is_some();
        drift.push(AntennaDrift {
            alpha: alpha.unwrap_or(0.0),
            beta: beta.unwrap_or(0.0),
        });
    }
    if any_key && !all_keys {
        return Err(Error::InvalidSynthSpec {
            reason: format!(
                "alpha_0..alpha_{} and beta_0..beta_{} must all be given together",
                antennas - 1,
                antennas - 1
            ),
        });
    }
    if any_key {
        spec.drift = DriftLaw::new(drift)?;
    } else if antennas != spec.drift.num_antennas() {
        return Err(Error::InvalidSynthSpec {
            reason: format!(
                "num_antennas = {antennas} has no default drift law; provide alpha_i and beta_i"
            ),
        });
    }

    if let Some((value, line)) = kv.take("temp_profile") {
        spec.temp_profile = parse_temp_profile(&value).ok_or_else(|| Error::Parse {
            path: path.as_ref().to_path_buf(),
            line,
            reason: format!("invalid temp_profile `{value}`"),
        })?;
    }
    kv.finish()?;
    spec.validate()?;
    Ok(spec)
}

fn parse_temp_profile(value: &str) -> Option<TempProfile> {
    let value = value.trim();
    let open = value.find('(')?;
    if !value.ends_with(')') {
        return None;
    }
    let name = value[..open].trim();
    let args: Vec<&str> = value[open + 1..value.len() - 1]
        .split(',')
        .map(str::trim)
        .collect();
    let num = |i: usize| args.get(i)?.parse::<f64>().ok();
    match (name, args.len()) {
        ("ramp", 2) => Some(TempProfile::Ramp {
            t_start: num(0)?,
            t_end: num(1)?,
        }),
        ("sinusoid", 3) => Some(TempProfile::Sinusoid {
            mean: num(0)?,
            amplitude: num(1)?,
            period_frames: args[2].parse().ok()?,
        }),
        ("random_walk", 4) => Some(TempProfile::RandomWalk {
            start: num(0)?,
            step_sigma: num(1)?,
            clamp_min: num(2)?,
            clamp_max: num(3)?,
        }),
        _ => None,
    }
}

/// Renders a spec back to the flat key-value form accepted by
/// [`read_synth_spec`].
pub fn render_synth_spec(spec: &SynthSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("start_freq_hz = {}\n", spec.config.start_freq_hz));
    out.push_str(&format!("end_freq_hz = {}\n", spec.config.end_freq_hz));
    out.push_str(&format!("num_antennas = {}\n", spec.config.num_antennas));
    out.push_str(&format!("num_chirps = {}\n", spec.config.num_chirps));
    out.push_str(&format!("num_samples = {}\n", spec.config.num_samples));
    out.push_str(&format!("num_frames = {}\n", spec.num_frames));
    out.push_str(&format!("target_bin = {}\n", spec.target_bin));
    out.push_str(&format!("tone_amplitude = {}\n", spec.tone_amplitude));
    for a in 0..spec.drift.num_antennas() {
        let d = spec.drift.antenna(a);
        out.push_str(&format!("alpha_{a} = {}\n", d.alpha));
        out.push_str(&format!("beta_{a} = {}\n", d.beta));
    }
    out.push_str(&format!("temp_profile = {}\n", spec.temp_profile));
    out.push_str(&format!("snr_db = {}\n", spec.snr_db));
    out.push_str(&format!("seed = {}\n", spec.seed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{fit, DEFAULT_EPSILON};
    use crate::preprocess::compute_amplitude_profiles;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn noiseless_spec() -> SynthSpec {
        SynthSpec {
            num_frames: 64,
            snr_db: f64::INFINITY,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn ramp_is_exact_interpolation() {
        let mut spec = noiseless_spec();
        spec.num_frames = 16;
        let temps = generate_temperatures(&spec).unwrap();
        let expect: Vec<f64> = (0..16).map(|i| 30.0 + i as f64).collect();
        assert_eq!(temps.temps(), expect.as_slice());
    }

    #[test]
    fn sinusoid_starts_at_mean_rising() {
        let mut spec = noiseless_spec();
        spec.temp_profile = TempProfile::Sinusoid {
            mean: 37.5,
            amplitude: 7.5,
            period_frames: 100,
        };
        spec.num_frames = 30;
        let temps = generate_temperatures(&spec).unwrap();
        assert_eq!(temps.get(0), 37.5);
        assert!(temps.get(1) > 37.5);
        assert_close(temps.get(25), 45.0, 1e-9);
    }

    #[test]
    fn random_walk_is_deterministic_and_clamped() {
        let mut spec = noiseless_spec();
        spec.temp_profile = TempProfile::RandomWalk {
            start: 37.5,
            step_sigma: 5.0,
            clamp_min: 30.0,
            clamp_max: 45.0,
        };
        spec.num_frames = 500;
        let a = generate_temperatures(&spec).unwrap();
        let b = generate_temperatures(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.temps().iter().all(|&t| (30.0..=45.0).contains(&t)));
        // big sigma actually moves
        assert!(a.temps().windows(2).any(|w| w[0] != w[1]));

        spec.seed = 8;
        let c = generate_temperatures(&spec).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unit_tone_without_drift_gives_unit_profile() {
        let mut spec = noiseless_spec();
        spec.num_frames = 4;
        spec.tone_amplitude = 1.0;
        spec.drift = DriftLaw::new(vec![
            AntennaDrift {
                alpha: 1.0,
                beta: 0.0
            };
            spec.config.num_antennas
        ])
        .unwrap();
        let temps = generate_temperatures(&spec).unwrap();
        let cube = generate_cube(&spec, &temps).unwrap();
        let ap = compute_amplitude_profiles(&cube);
        for f in 0..4 {
            for a in 0..3 {
                assert_close(ap.value(f, a, spec.target_bin), 1.0, 1e-10);
            }
        }
    }

    #[test]
    fn noiseless_drift_recovers_exactly() {
        let mut spec = noiseless_spec();
        spec.drift = DriftLaw::new(vec![
            AntennaDrift {
                alpha: 2.0,
                beta: -0.01,
            };
            spec.config.num_antennas
        ])
        .unwrap();
        let temps = generate_temperatures(&spec).unwrap();
        let cube = generate_cube(&spec, &temps).unwrap();
        let ap = compute_amplitude_profiles(&cube);
        // profile at the target bin equals gain(T) * tone_amplitude
        for f in [0usize, 31, 63] {
            let expect = (2.0 - 0.01 * temps.get(f)) * spec.tone_amplitude;
            assert_close(ap.value(f, 0, spec.target_bin), expect, 1e-12);
        }
        let model = fit(&ap, &temps, DEFAULT_EPSILON).unwrap();
        let m = model.bin_model(0, spec.target_bin).unwrap();
        assert_close(m.slope, -0.01 * spec.tone_amplitude, 1e-9 * 0.01);
        assert_close(m.intercept, 2.0 * spec.tone_amplitude, 1e-9 * 2.0);
    }

    #[test]
    fn generation_is_bit_deterministic() {
        let mut spec = SynthSpec {
            num_frames: 8,
            ..SynthSpec::default()
        };
        let t1 = generate_temperatures(&spec).unwrap();
        let c1 = generate_cube(&spec, &t1).unwrap();
        let t2 = generate_temperatures(&spec).unwrap();
        let c2 = generate_cube(&spec, &t2).unwrap();
        assert_eq!(c1, c2);

        spec.seed = 8;
        let c3 = generate_cube(&spec, &t1).unwrap();
        assert_ne!(c1, c3);
    }

    #[test]
    fn rejects_non_positive_gain() {
        let mut spec = noiseless_spec();
        spec.drift = DriftLaw::new(vec![
            AntennaDrift {
                alpha: -1.0,
                beta: 0.0,
            };
            spec.config.num_antennas
        ])
        .unwrap();
        let temps = generate_temperatures(&spec).unwrap();
        assert!(matches!(
            generate_cube(&spec, &temps),
            Err(Error::NonPositiveGain { .. })
        ));
    }

    #[test]
    fn measured_noise_matches_configured_snr() {
        let mut spec = SynthSpec::default();
        spec.config.num_antennas = 1;
        spec.config.num_chirps = 1;
        spec.drift = DriftLaw::new(vec![AntennaDrift {
            alpha: 1.0,
            beta: 0.0,
        }])
        .unwrap();
        spec.num_frames = 1000;
        spec.snr_db = 20.0;
        let temps = generate_temperatures(&spec).unwrap();
        let cube = generate_cube(&spec, &temps).unwrap();

        // average |FFT bin|^2 over non-target bins; each holds noise power
        // sigma^2 / N, with sigma^2 = emitted^2 / snr
        let n = spec.config.num_samples;
        let emitted = spec.tone_amplitude / 2.0;
        let mut acc = 0.0;
        let mut count = 0usize;
        for f in 0..spec.num_frames {
            let spectrum = crate::preprocess::fft_normalized(cube.chirp(f, 0, 0));
            for (b, v) in spectrum.bins().iter().enumerate() {
                if b != spec.target_bin {
                    acc += v.norm_sqr();
                    count += 1;
                }
            }
        }
        let sigma_sq = acc / count as f64 * n as f64;
        let measured_snr_db = 10.0 * (emitted * emitted / sigma_sq).log10();
        assert!(
            (measured_snr_db - 20.0).abs() < 0.5,
            "measured {measured_snr_db} dB"
        );
    }

    #[test]
    fn spec_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.kv");
        let spec = SynthSpec {
            num_frames: 123,
            snr_db: f64::INFINITY,
            temp_profile: TempProfile::Sinusoid {
                mean: 37.5,
                amplitude: 5.0,
                period_frames: 250,
            },
            ..SynthSpec::default()
        };
        std::fs::write(&path, render_synth_spec(&spec)).unwrap();
        let back = read_synth_spec(&path).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn empty_spec_file_is_the_default() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.kv");
        std::fs::write(&path, "# defaults only\n").unwrap();
        assert_eq!(read_synth_spec(&path).unwrap(), SynthSpec::default());
    }

    #[test]
    fn spec_file_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.kv");

        std::fs::write(&path, "target_bin = 99\n").unwrap();
        assert!(matches!(
            read_synth_spec(&path),
            Err(Error::InvalidSynthSpec { .. })
        ));

        std::fs::write(&path, "what = 1\n").unwrap();
        assert!(matches!(read_synth_spec(&path), Err(Error::Parse { .. })));

        // non-default antenna count requires an explicit drift law
        std::fs::write(&path, "num_antennas = 2\n").unwrap();
        assert!(read_synth_spec(&path).is_err());
        // partial drift law rejected
        std::fs::write(&path, "num_antennas = 2\nalpha_0 = 1\nbeta_0 = 0\n").unwrap();
        assert!(read_synth_spec(&path).is_err());
        std::fs::write(
            &path,
            "num_antennas = 2\nalpha_0 = 1\nbeta_0 = 0\nalpha_1 = 1\nbeta_1 = 0\n",
        )
        .unwrap();
        let spec = read_synth_spec(&path).unwrap();
        assert_eq!(spec.drift.num_antennas(), 2);

        std::fs::write(&path, "temp_profile = spiral(1,2)\n").unwrap();
        assert!(matches!(read_synth_spec(&path), Err(Error::Parse { .. })));

        std::fs::write(&path, "snr_db = inf\n").unwrap();
        assert_eq!(read_synth_spec(&path).unwrap().snr_db, f64::INFINITY);
    }

    #[test]
    fn cosine_helper_matches_pipeline_identity() {
        let chirp = cosine_chirp(32, 5, 1.0);
        let amp = crate::preprocess::amplitude(&crate::preprocess::positive_spectrum(
            &crate::preprocess::fft_normalized(&crate::preprocess::remove_dc(&chirp)),
        ));
        assert_close(amp[5], 1.0, 1e-10);
    }

    #[test]
    fn complex_tone_helper_matches_generator_shape() {
        let mut spec = noiseless_spec();
        spec.num_frames = 1;
        spec.tone_amplitude = 2.0;
        spec.drift = DriftLaw::new(vec![
            AntennaDrift {
                alpha: 1.0,
                beta: 0.0
            };
            spec.config.num_antennas
        ])
        .unwrap();
        let temps = generate_temperatures(&spec).unwrap();
        let cube = generate_cube(&spec, &temps).unwrap();
        let expect = complex_tone_chirp(32, spec.target_bin, 1.0);
        let got = cube.chirp(0, 0, 0);
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).norm() < 1e-12);
        }
    }
}
