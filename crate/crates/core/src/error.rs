use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by file ingestion, validation, and the processing stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic in {path}: expected {expected:?}")]
    BadMagic {
        path: PathBuf,
        expected: &'static str,
    },

    #[error(
        "{path}: payload length mismatch: header implies {expected} bytes, file holds {found}"
    )]
    PayloadLengthMismatch {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}: reserved header field must be zero, found {found}")]
    ReservedNonZero { path: PathBuf, found: u32 },

    #[error("non-finite value at {context}")]
    NonFinite { context: String },

    #[error("negative amplitude at {context}")]
    NegativeAmplitude { context: String },

    #[error("invalid radar config: {reason}")]
    InvalidConfig { reason: String },

    #[error("temperature log {path}: missing frame index {expected} (found {found})")]
    MissingFrameIndex {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("temperature log {path}: duplicate or out-of-order frame index {found} (expected {expected})")]
    DuplicateFrameIndex {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("parse error in {path} line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("frame count mismatch: {left} has {left_frames} frames, {right} has {right_frames}")]
    FrameCountMismatch {
        left: &'static str,
        left_frames: usize,
        right: &'static str,
        right_frames: usize,
    },

    #[error("train fraction must lie strictly between 0 and 1, got {value}")]
    TrainFractionOutOfRange { value: f64 },

    #[error("insufficient training data: {frames} frames, need at least 2")]
    InsufficientTrainingData { frames: usize },

    #[error("degenerate training data: zero temperature variance across {frames} frames")]
    ZeroTemperatureVariance { frames: usize },

    #[error("dimension mismatch: {reason}")]
    DimensionMismatch { reason: String },

    #[error(
        "index out of range: antenna {antenna}, bin {bin} (grid is {num_antennas} x {num_bins})"
    )]
    IndexOutOfRange {
        antenna: usize,
        bin: usize,
        num_antennas: usize,
        num_bins: usize,
    },

    #[error("antenna {antenna} out of range (tensor has {num_antennas})")]
    AntennaOutOfRange { antenna: usize, num_antennas: usize },

    #[error("empty input: {context}")]
    EmptyInput { context: String },

    #[error("no model fitted for antenna {antenna}, bin {bin}")]
    NoBinModel { antenna: usize, bin: usize },

    #[error("reference temperature {t_ref} outside training range [{t_min}, {t_max}]")]
    TRefOutOfRange { t_ref: f64, t_min: f64, t_max: f64 },

    #[error("malformed model file {path}: {reason}")]
    MalformedModel { path: PathBuf, reason: String },

    #[error("unsupported model format version {found} in {path}, expected {expected}")]
    ModelVersionMismatch {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("correlation undefined: {reason}")]
    UndefinedCorrelation { reason: String },

    #[error("synthesis spec invalid: {reason}")]
    InvalidSynthSpec { reason: String },

    #[error("drift law for antenna {antenna} non-positive at {temp_c} C (gain {gain})")]
    NonPositiveGain {
        antenna: usize,
        temp_c: f64,
        gain: f64,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures rooted in the operating system rather than in input
    /// validation. Callers use this to pick an exit code.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
