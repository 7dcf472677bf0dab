//! Temperature drift compensation for FMCW radar amplitude profiles.
//!
//! The internal temperature of a radar front end modulates the amplitude of
//! its IF signal, which corrupts any downstream task that reads amplitude.
//! This crate removes that drift in four stages:
//!
//! 1. [`preprocess`] reduces raw IQ data cubes to per-frame, per-antenna
//!    amplitude profiles (DC removal, normalized FFT, positive-spectrum
//!    truncation, magnitude, chirp averaging).
//! 2. [`calibration`] fits one linear temperature-to-amplitude model per
//!    antenna and range bin on a chronological training slice, then rescales
//!    amplitudes by `predicted(t_ref) / predicted(t_frame)`.
//! 3. [`evaluate`] quantifies the result as the Pearson correlation between
//!    temperature and peak-bin amplitude, before and after correction.
//! 4. [`synth`] generates cubes with a known injected drift law so the whole
//!    chain can be verified against ground truth.
//!
//! [`datacube`] defines the shared container types and file formats. All
//! computation is `f64`, single-threaded, and deterministic: identical
//! inputs produce bit-identical outputs.

pub mod calibration;
pub mod datacube;
pub mod error;
pub mod evaluate;
mod kv;
pub mod preprocess;
pub mod synth;

pub use calibration::{
    fit, fit_bins, load_model, save_model, split_train_test, train_boundary, BinModel,
    CalibrationModel, CorrectionFlag, CorrectionFlags, Extrapolation, TrainTestSplit,
    DEFAULT_EPSILON, MODEL_FORMAT_VERSION,
};
pub use datacube::{
    read_config_file, read_cube, read_temperature_log, write_cube, write_temperature_log,
    AmplitudeTensor, PipelineConfig, RadarConfig, RadarCube, TemperatureLog,
};
pub use error::{Error, Result};
pub use evaluate::{
    evaluate, peak_bin, pearson, render_per_bin, render_report, render_series, write_report,
    AntennaReport, BinCorrelation, EvaluationReport,
};
pub use preprocess::{
    amplitude, chirp_average, compute_amplitude_profiles, fft_normalized, positive_spectrum,
    read_amplitude_tensor, remove_dc, write_amplitude_tensor, Spectrum,
};
pub use synth::{
    generate_cube, generate_temperatures, read_synth_spec, render_synth_spec, AntennaDrift,
    DriftLaw, SynthSpec, TempProfile,
};
