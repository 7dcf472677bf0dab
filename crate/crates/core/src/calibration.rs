//! Per-antenna, per-bin linear temperature models and the multiplicative
//! amplitude correction built on them.
//!
//! Training fits one ordinary-least-squares line per (antenna, bin) mapping
//! internal temperature to amplitude. Inference rescales each amplitude by
//! `predicted(t_ref) / predicted(t_frame)`, which cancels any drift that is
//! multiplicative in temperature. Two guards keep the correction sane at
//! noise-only bins: frames whose predicted amplitude is within `epsilon` of
//! zero are left uncorrected and flagged, as are frames where the predicted
//! amplitude and the reference prediction disagree in sign (a blind
//! correction there would flip the amplitude negative).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datacube::{AmplitudeTensor, TemperatureLog};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Fitted line for one (antenna, bin) cell: amplitude = slope * T + intercept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinModel {
    pub antenna: usize,
    pub bin: usize,
    pub slope: f64,
    pub intercept: f64,
}

/// Behavior for temperatures outside the training range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extrapolation {
    /// Clamp to `[t_min, t_max]` before evaluating the line.
    #[default]
    Clamp,
    /// Follow the fitted line beyond the training range.
    Linear,
}

/// The full trained model: a (possibly sparse) grid of per-bin lines plus
/// the reference temperature and guard threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationModel {
    t_ref: f64,
    t_min: f64,
    t_max: f64,
    epsilon: f64,
    num_antennas: usize,
    num_bins: usize,
    models: Vec<Option<BinModel>>,
}

/// Locations where the correction was skipped by a guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrectionFlag {
    pub frame: usize,
    pub antenna: usize,
    pub bin: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrectionFlags {
    entries: Vec<CorrectionFlag>,
}

impl CorrectionFlags {
    pub fn entries(&self) -> &[CorrectionFlag] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,antenna,bin\n");
        for f in &self.entries {
            out.push_str(&format!("{},{},{}\n", f.frame, f.antenna, f.bin));
        }
        out
    }
}

/// Chronological split of paired amplitude/temperature data.
#[derive(Debug, Clone)]
pub struct TrainTestSplit {
    pub train_ap: AmplitudeTensor,
    pub train_temps: TemperatureLog,
    pub test_ap: AmplitudeTensor,
    pub test_temps: TemperatureLog,
}

/// Index of the first test frame: `floor(num_frames * train_fraction)`.
pub fn train_boundary(num_frames: usize, train_fraction: f64) -> Result<usize> {
    if !(train_fraction.is_finite() && 0.0 < train_fraction && train_fraction < 1.0) {
        return Err(Error::TrainFractionOutOfRange {
            value: train_fraction,
        });
    }
    Ok((num_frames as f64 * train_fraction).floor() as usize)
}

/// Splits frames chronologically: the first `floor(F * train_fraction)`
/// frames train, the rest test. No shuffling.
pub fn split_train_test(
    ap: &AmplitudeTensor,
    temps: &TemperatureLog,
    train_fraction: f64,
) -> Result<TrainTestSplit> {
    check_frames(ap, temps)?;
    let boundary = train_boundary(ap.num_frames(), train_fraction)?;
    Ok(TrainTestSplit {
        train_ap: ap.slice_frames(0, boundary)?,
        train_temps: temps.slice(0, boundary),
        test_ap: ap.slice_frames(boundary, ap.num_frames())?,
        test_temps: temps.slice(boundary, temps.len()),
    })
}

fn check_frames(ap: &AmplitudeTensor, temps: &TemperatureLog) -> Result<()> {
    if ap.num_frames() != temps.len() {
        return Err(Error::FrameCountMismatch {
            left: "amplitude tensor",
            left_frames: ap.num_frames(),
            right: "temperature log",
            right_frames: temps.len(),
        });
    }
    Ok(())
}

/// Fits every bin. See [`fit_bins`].
pub fn fit(
    train_ap: &AmplitudeTensor,
    train_temps: &TemperatureLog,
    epsilon: f64,
) -> Result<CalibrationModel> {
    fit_bins(train_ap, train_temps, epsilon, None)
}

/// Fits one least-squares line per (antenna, bin), restricted to `bins` when
/// given. `t_ref` is set to the mean training temperature.
pub fn fit_bins(
    train_ap: &AmplitudeTensor,
    train_temps: &TemperatureLog,
    epsilon: f64,
    bins: Option<&[usize]>,
) -> Result<CalibrationModel> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidConfig {
            reason: format!("epsilon must be positive and finite, got {epsilon}"),
        });
    }
    check_frames(train_ap, train_temps)?;
    let frames = train_temps.len();
    if frames < 2 {
        return Err(Error::InsufficientTrainingData { frames });
    }
    let num_bins = train_ap.num_bins();
    let selected: BTreeSet<usize> = match bins {
        Some(list) => {
            for &b in list {
                if b >= num_bins {
                    return Err(Error::InvalidConfig {
                        reason: format!("bin {b} out of range, tensor has {num_bins} bins"),
                    });
                }
            }
            list.iter().copied().collect()
        }
        None => (0..num_bins).collect(),
    };

    let temps = train_temps.temps();
    let t_mean = temps.iter().sum::<f64>() / frames as f64;
    let stt: f64 = temps.iter().map(|t| (t - t_mean) * (t - t_mean)).sum();
    let all_identical = temps.windows(2).all(|w| w[0] == w[1]);
    if stt <= 0.0 || all_identical {
        return Err(Error::ZeroTemperatureVariance { frames });
    }

    let num_antennas = train_ap.num_antennas();
    let mut models = vec![None; num_antennas * num_bins];
    for a in 0..num_antennas {
        for &b in &selected {
            let x_mean = (0..frames).map(|f| train_ap.value(f, a, b)).sum::<f64>() / frames as f64;
            let mut sxt = 0.0;
            for (f, t) in temps.iter().enumerate() {
                sxt += (t - t_mean) * (train_ap.value(f, a, b) - x_mean);
            }
            let slope = sxt / stt;
            let intercept = x_mean - slope * t_mean;
            if !slope.is_finite() || !intercept.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("fitted line for antenna {a}, bin {b}"),
                });
            }
            models[a * num_bins + b] = Some(BinModel {
                antenna: a,
                bin: b,
                slope,
                intercept,
            });
        }
    }

    let t_min = temps.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = temps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CalibrationModel {
        t_ref: t_mean,
        t_min,
        t_max,
        epsilon,
        num_antennas,
        num_bins,
        models,
    })
}

impl CalibrationModel {
    /// Assembles a model from parts, validating every invariant the trainer
    /// guarantees.
    pub fn new(
        t_ref: f64,
        t_min: f64,
        t_max: f64,
        epsilon: f64,
        num_antennas: usize,
        num_bins: usize,
        bin_models: Vec<BinModel>,
    ) -> Result<Self> {
        let invalid = |reason: String| Err(Error::InvalidConfig { reason });
        if !(t_min.is_finite() && t_max.is_finite() && t_ref.is_finite()) {
            return invalid("temperature fields must be finite".into());
        }
        if !(t_min <= t_ref && t_ref <= t_max) {
            return Err(Error::TRefOutOfRange {
                t_ref,
                t_min,
                t_max,
            });
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return invalid(format!(
                "epsilon must be positive and finite, got {epsilon}"
            ));
        }
        if num_antennas < 1 || num_bins < 1 {
            return invalid("model grid must be at least 1 x 1".into());
        }
        let mut models = vec![None; num_antennas * num_bins];
        for m in bin_models {
            if m.antenna >= num_antennas || m.bin >= num_bins {
                return Err(Error::IndexOutOfRange {
                    antenna: m.antenna,
                    bin: m.bin,
                    num_antennas,
                    num_bins,
                });
            }
            if !m.slope.is_finite() || !m.intercept.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("line for antenna {}, bin {}", m.antenna, m.bin),
                });
            }
            let slot = &mut models[m.antenna * num_bins + m.bin];
            if slot.is_some() {
                return invalid(format!(
                    "duplicate entry for antenna {}, bin {}",
                    m.antenna, m.bin
                ));
            }
            *slot = Some(m);
        }
        Ok(CalibrationModel {
            t_ref,
            t_min,
            t_max,
            epsilon,
            num_antennas,
            num_bins,
            models,
        })
    }

    pub fn t_ref(&self) -> f64 {
        self.t_ref
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn bin_model(&self, antenna: usize, bin: usize) -> Option<&BinModel> {
        if antenna >= self.num_antennas || bin >= self.num_bins {
            return None;
        }
        self.models[antenna * self.num_bins + bin].as_ref()
    }

    /// Fitted cells in (antenna, bin) order.
    pub fn fitted_models(&self) -> impl Iterator<Item = &BinModel> {
        self.models.iter().filter_map(|m| m.as_ref())
    }

    /// Replaces the reference temperature; it must stay inside the training
    /// range.
    pub fn with_t_ref(mut self, t_ref: f64) -> Result<Self> {
        if !t_ref.is_finite() || t_ref < self.t_min || t_ref > self.t_max {
            return Err(Error::TRefOutOfRange {
                t_ref,
                t_min: self.t_min,
                t_max: self.t_max,
            });
        }
        self.t_ref = t_ref;
        Ok(self)
    }

    /// Predicted amplitude at temperature `t`, clamping to the training
    /// range.
    pub fn predict(&self, antenna: usize, bin: usize, t: f64) -> Result<f64> {
        self.predict_with(antenna, bin, t, Extrapolation::Clamp)
    }

    pub fn predict_with(
        &self,
        antenna: usize,
        bin: usize,
        t: f64,
        mode: Extrapolation,
    ) -> Result<f64> {
        if antenna >= self.num_antennas || bin >= self.num_bins {
            return Err(Error::IndexOutOfRange {
                antenna,
                bin,
                num_antennas: self.num_antennas,
                num_bins: self.num_bins,
            });
        }
        if !t.is_finite() {
            return Err(Error::NonFinite {
                context: format!("prediction temperature {t}"),
            });
        }
        let m = self.models[antenna * self.num_bins + bin]
            .as_ref()
            .ok_or(Error::NoBinModel { antenna, bin })?;
        Ok(m.slope * self.effective_t(t, mode) + m.intercept)
    }

    fn effective_t(&self, t: f64, mode: Extrapolation) -> f64 {
        match mode {
            Extrapolation::Clamp => t.clamp(self.t_min, self.t_max),
            Extrapolation::Linear => t,
        }
    }

    /// Rescales every amplitude by `predicted(t_ref) / predicted(t_frame)`.
    /// Guarded cells (near-zero or sign-flipping predictions) pass through
    /// unchanged and are flagged; bins without a fitted line pass through
    /// unflagged.
    pub fn apply_correction(
        &self,
        ap: &AmplitudeTensor,
        temps: &TemperatureLog,
        mode: Extrapolation,
    ) -> Result<(AmplitudeTensor, CorrectionFlags)> {
        check_frames(ap, temps)?;
        if ap.num_antennas() != self.num_antennas || ap.num_bins() != self.num_bins {
            return Err(Error::DimensionMismatch {
                reason: format!(
                    "model grid is {} x {}, tensor is {} x {}",
                    self.num_antennas,
                    self.num_bins,
                    ap.num_antennas(),
                    ap.num_bins()
                ),
            });
        }
        // reference predictions, same expression predict_with evaluates
        let refs: Vec<Option<f64>> = self
            .models
            .iter()
            .map(|m| m.as_ref().map(|m| m.slope * self.t_ref + m.intercept))
            .collect();
        let mut values = Vec::with_capacity(ap.values().len());
        let mut flags = CorrectionFlags::default();
        for f in 0..ap.num_frames() {
            let t_eff = self.effective_t(temps.get(f), mode);
            for a in 0..self.num_antennas {
                for b in 0..self.num_bins {
                    let v = ap.value(f, a, b);
                    let cell = a * self.num_bins + b;
                    match (&self.models[cell], refs[cell]) {
                        (Some(m), Some(reference)) => {
                            let predicted = m.slope * t_eff + m.intercept;
                            if predicted.abs() <= self.epsilon || reference * predicted < 0.0 {
                                flags.entries.push(CorrectionFlag {
                                    frame: f,
                                    antenna: a,
                                    bin: b,
                                });
                                values.push(v);
                            } else {
                                values.push(v * (reference / predicted));
                            }
                        }
                        _ => values.push(v),
                    }
                }
            }
        }
        let tcap = AmplitudeTensor::new(ap.num_frames(), self.num_antennas, self.num_bins, values)?;
        Ok((tcap, flags))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    t_ref: f64,
    t_min: f64,
    t_max: f64,
    epsilon: f64,
    num_antennas: usize,
    num_bins: usize,
    models: Vec<BinModel>,
}

/// Writes the model as JSON. Numbers use shortest round-trip formatting, so
/// parameters reload bit-identically.
pub fn save_model(model: &CalibrationModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        t_ref: model.t_ref,
        t_min: model.t_min,
        t_max: model.t_max,
        epsilon: model.epsilon,
        num_antennas: model.num_antennas,
        num_bins: model.num_bins,
        models: model.fitted_models().copied().collect(),
    };
    let mut json = serde_json::to_string_pretty(&file).expect("model serializes");
    json.push('\n');
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CalibrationModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::MalformedModel {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelVersionMismatch {
            path: path.to_path_buf(),
            expected: MODEL_FORMAT_VERSION,
            found: file.format_version,
        });
    }
    CalibrationModel::new(
        file.t_ref,
        file.t_min,
        file.t_max,
        file.epsilon,
        file.num_antennas,
        file.num_bins,
        file.models,
    )
    .map_err(|e| match e {
        Error::Io { .. } => e,
        other => Error::MalformedModel {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })
}
