//! `radarcal`: batch workflow for removing temperature-induced amplitude
//! drift from radar captures.
//!
//! The five subcommands compose into a pipeline over shared files:
//! `synth` (optional, test data) -> `preprocess` -> `train` -> `calibrate`
//! -> `evaluate`. Each run writes a `<output>.manifest.json` after all
//! other files; its presence marks success. Exit codes: 0 on success, 1 on
//! validation failures, 2 on I/O failures (malformed invocations keep
//! clap's usage exit code 2). Set `RADARCAL_LOG=info` or `debug` for
//! progress output.

mod manifest;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use radarcal_core::{
    evaluate, fit_bins, generate_cube, generate_temperatures, load_model, read_amplitude_tensor,
    read_config_file, read_cube, read_synth_spec, read_temperature_log, render_per_bin,
    render_series, save_model, split_train_test, train_boundary, write_amplitude_tensor,
    write_cube, write_report, write_temperature_log, Error, Extrapolation,
};

use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "radarcal",
    version,
    about = "Temperature drift compensation for radar amplitude profiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cube and temperature log from a spec file
    Synth(SynthArgs),
    /// Reduce a raw cube to per-frame amplitude profiles
    Preprocess(PreprocessArgs),
    /// Fit the per-bin temperature model on the chronological training slice
    Train(TrainArgs),
    /// Apply a trained model, producing compensated profiles
    Calibrate(CalibrateArgs),
    /// Correlate temperature with profiles before and after compensation
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Synthesis spec (flat key = value file)
    #[arg(long)]
    spec: PathBuf,
    /// Output cube path
    #[arg(long)]
    out_cube: PathBuf,
    /// Output temperature CSV path
    #[arg(long)]
    out_temps: PathBuf,
    /// Override the spec's PRNG seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input cube
    #[arg(long)]
    cube: PathBuf,
    /// Output amplitude tensor
    #[arg(long)]
    out: PathBuf,
    /// Config file cross-checked against the cube header
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Input amplitude tensor
    #[arg(long)]
    ap: PathBuf,
    /// Input temperature CSV
    #[arg(long)]
    temps: PathBuf,
    /// Output model JSON
    #[arg(long)]
    out: PathBuf,
    /// Config file supplying a default train fraction
    #[arg(long)]
    config: Option<PathBuf>,
    /// Leading fraction of frames used for training (default 0.7)
    #[arg(long, allow_negative_numbers = true)]
    train_fraction: Option<f64>,
    /// Prediction floor below which corrections are skipped
    #[arg(long, default_value_t = radarcal_core::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Override the reference temperature (default: training mean)
    #[arg(long, allow_negative_numbers = true)]
    t_ref: Option<f64>,
    /// Restrict fitting to these bins, e.g. "0,2,5-8" (default: all)
    #[arg(long)]
    bins: Option<String>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Input amplitude tensor
    #[arg(long)]
    ap: PathBuf,
    /// Input temperature CSV
    #[arg(long)]
    temps: PathBuf,
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Output compensated tensor
    #[arg(long)]
    out: PathBuf,
    /// Where to write skipped-correction flags (default: <out>.flags.csv)
    #[arg(long)]
    flags: Option<PathBuf>,
    /// Follow the fitted line outside the training temperature range
    /// instead of clamping
    #[arg(long)]
    extrapolate: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Uncompensated amplitude tensor
    #[arg(long)]
    ap: PathBuf,
    /// Compensated amplitude tensor
    #[arg(long)]
    tcap: PathBuf,
    /// Input temperature CSV
    #[arg(long)]
    temps: PathBuf,
    /// Output report CSV
    #[arg(long)]
    out: PathBuf,
    /// Score only the held-out tail after the train/test boundary
    #[arg(long)]
    test_only: bool,
    /// Train fraction fixing the boundary for --test-only (default 0.7)
    #[arg(long, allow_negative_numbers = true)]
    train_fraction: Option<f64>,
    /// Reuse the boundary recorded in a train run's manifest
    #[arg(long)]
    split_from: Option<PathBuf>,
    /// Config file supplying a default train fraction
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write per-frame peak-bin series, one CSV per antenna
    /// (an antenna suffix is inserted before the extension)
    #[arg(long)]
    series: Option<PathBuf>,
    /// Also write the full per-bin correlation table
    #[arg(long)]
    per_bin: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Usage(msg) => msg.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_io() => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RADARCAL_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::Train(args) => cmd_train(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn write_text(path: &Path, text: String) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Core(Error::io(path, e)))
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let mut spec = read_synth_spec(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let temps = generate_temperatures(&spec)?;
    let cube = generate_cube(&spec, &temps)?;
    info!(
        "synthesized {} frames, {} antennas, tone at bin {}",
        spec.num_frames, spec.config.num_antennas, spec.target_bin
    );
    write_temperature_log(&temps, &args.out_temps)?;
    write_cube(&cube, &args.out_cube)?;
    RunManifest::new("synth")
        .input("spec", &args.spec)
        .output("cube", &args.out_cube)
        .output("temps", &args.out_temps)
        .param("seed", spec.seed)
        .param("num_frames", spec.num_frames)
        .param("target_bin", spec.target_bin)
        .param("tone_amplitude", spec.tone_amplitude)
        .param("temp_profile", spec.temp_profile)
        .param("snr_db", spec.snr_db)
        .write_for(&args.out_cube)?;
    Ok(())
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<(), CliError> {
    let cube = read_cube(&args.cube)?;
    let mut m = RunManifest::new("preprocess").input("cube", &args.cube);
    if let Some(config_path) = &args.config {
        let cfg = read_config_file(config_path)?.radar;
        let c = cube.config();
        if (cfg.num_antennas, cfg.num_chirps, cfg.num_samples)
            != (c.num_antennas, c.num_chirps, c.num_samples)
        {
            return Err(CliError::Core(Error::DimensionMismatch {
                reason: format!(
                    "config expects {} antennas, {} chirps, {} samples; cube header has {}, {}, {}",
                    cfg.num_antennas,
                    cfg.num_chirps,
                    cfg.num_samples,
                    c.num_antennas,
                    c.num_chirps,
                    c.num_samples
                ),
            }));
        }
        m = m.input("config", config_path);
    }
    let ap = radarcal_core::compute_amplitude_profiles(&cube);
    info!(
        "preprocessed {} frames into {} bins per antenna",
        ap.num_frames(),
        ap.num_bins()
    );
    write_amplitude_tensor(&ap, &args.out)?;
    m.output("ap", &args.out).write_for(&args.out)?;
    Ok(())
}

/// Flag value, then config file, then 0.7.
fn resolve_fraction(flag: Option<f64>, config: Option<&Path>) -> Result<f64, CliError> {
    if let Some(f) = flag {
        return Ok(f);
    }
    if let Some(path) = config {
        if let Some(f) = read_config_file(path)?.train_fraction {
            return Ok(f);
        }
    }
    Ok(0.7)
}

fn parse_bins(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = |what: &str| CliError::Usage(format!("invalid --bins entry `{what}`"));
    let mut bins = BTreeSet::new();
    for token in spec.split(',') {
        let token = token.trim();
        match token.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad(token))?;
                let hi: usize = hi.trim().parse().map_err(|_| bad(token))?;
                if lo > hi {
                    return Err(bad(token));
                }
                bins.extend(lo..=hi);
            }
            None => {
                bins.insert(token.parse().map_err(|_| bad(token))?);
            }
        }
    }
    Ok(bins.into_iter().collect())
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let ap = read_amplitude_tensor(&args.ap)?;
    let temps = read_temperature_log(&args.temps)?;
    let fraction = resolve_fraction(args.train_fraction, args.config.as_deref())?;
    let split = split_train_test(&ap, &temps, fraction)?;
    let bins = args.bins.as_deref().map(parse_bins).transpose()?;
    let mut model = fit_bins(
        &split.train_ap,
        &split.train_temps,
        args.epsilon,
        bins.as_deref(),
    )?;
    if let Some(t_ref) = args.t_ref {
        model = model.with_t_ref(t_ref)?;
    }
    info!(
        "fitted {} bin models on {} frames, t_ref {:.3}",
        model.fitted_models().count(),
        split.train_ap.num_frames(),
        model.t_ref()
    );
    save_model(&model, &args.out)?;
    let mut m = RunManifest::new("train")
        .input("ap", &args.ap)
        .input("temps", &args.temps)
        .output("model", &args.out)
        .param("train_fraction", fraction)
        .param("train_end_frame", split.train_ap.num_frames())
        .param("epsilon", args.epsilon)
        .param("t_ref", model.t_ref());
    if let Some(config) = &args.config {
        m = m.input("config", config);
    }
    if let Some(bins) = &bins {
        let list: Vec<String> = bins.iter().map(usize::to_string).collect();
        m = m.param("bins", list.join(","));
    }
    m.write_for(&args.out)?;
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let ap = read_amplitude_tensor(&args.ap)?;
    let temps = read_temperature_log(&args.temps)?;
    let model = load_model(&args.model)?;
    let mode = if args.extrapolate {
        Extrapolation::Linear
    } else {
        Extrapolation::Clamp
    };
    let (tcap, flags) = model.apply_correction(&ap, &temps, mode)?;
    info!(
        "compensated {} frames, {} corrections skipped",
        tcap.num_frames(),
        flags.len()
    );
    let flags_path = args
        .flags
        .clone()
        .unwrap_or_else(|| args.out.with_extension("flags.csv"));
    write_amplitude_tensor(&tcap, &args.out)?;
    write_text(&flags_path, flags.to_csv())?;
    RunManifest::new("calibrate")
        .input("ap", &args.ap)
        .input("temps", &args.temps)
        .input("model", &args.model)
        .output("tcap", &args.out)
        .output("flags", &flags_path)
        .param("extrapolate", args.extrapolate)
        .param("skipped", flags.len())
        .write_for(&args.out)?;
    Ok(())
}

/// Boundary for --test-only: a recorded train manifest wins over fractions.
fn resolve_boundary(args: &EvaluateArgs, num_frames: usize) -> Result<usize, CliError> {
    if let Some(path) = &args.split_from {
        let m = RunManifest::read(path)?;
        if m.subcommand != "train" {
            return Err(CliError::Usage(format!(
                "{} records a `{}` run, not a train run",
                path.display(),
                m.subcommand
            )));
        }
        let boundary: usize = m
            .params
            .get("train_end_frame")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| {
                CliError::Usage(format!("{} has no usable train_end_frame", path.display()))
            })?;
        if boundary > num_frames {
            return Err(CliError::Usage(format!(
                "recorded boundary {boundary} exceeds the {num_frames} frames being evaluated"
            )));
        }
        return Ok(boundary);
    }
    let fraction = resolve_fraction(args.train_fraction, args.config.as_deref())?;
    Ok(train_boundary(num_frames, fraction)?)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let ap = read_amplitude_tensor(&args.ap)?;
    let tcap = read_amplitude_tensor(&args.tcap)?;
    let temps = read_temperature_log(&args.temps)?;
    if ap.num_frames() != tcap.num_frames() || temps.len() != ap.num_frames() {
        return Err(CliError::Core(Error::DimensionMismatch {
            reason: format!(
                "frame counts differ: ap {}, tcap {}, temps {}",
                ap.num_frames(),
                tcap.num_frames(),
                temps.len()
            ),
        }));
    }
    let first_frame = if args.test_only {
        resolve_boundary(&args, ap.num_frames())?
    } else {
        0
    };
    let ap_eval = ap.slice_frames(first_frame, ap.num_frames())?;
    let tcap_eval = tcap.slice_frames(first_frame, tcap.num_frames())?;
    let temps_eval = temps.slice(first_frame, temps.len());
    let mut report = evaluate(&ap_eval, &tcap_eval, &temps_eval)?;
    report.first_frame = first_frame;
    for r in &report.antennas {
        info!(
            "antenna {}: peak bin {}, pr_ap {:?}, pr_tcap {:?}",
            r.antenna, r.peak_bin, r.pr_ap, r.pr_tcap
        );
    }
    write_report(&report, &args.out)?;
    let mut m = RunManifest::new("evaluate")
        .input("ap", &args.ap)
        .input("tcap", &args.tcap)
        .input("temps", &args.temps)
        .output("report", &args.out)
        .param("test_only", args.test_only)
        .param("first_frame", first_frame);
    if let Some(path) = &args.split_from {
        m = m.input("split_from", path);
    }
    if let Some(base) = &args.series {
        for r in &report.antennas {
            let path = series_path(base, r.antenna);
            let csv = render_series(
                &ap_eval,
                &tcap_eval,
                &temps_eval,
                r.antenna,
                r.peak_bin,
                first_frame,
            )?;
            write_text(&path, csv)?;
            m = m.output(&format!("series_a{}", r.antenna), &path);
        }
    }
    if let Some(path) = &args.per_bin {
        write_text(path, render_per_bin(&report))?;
        m = m.output("per_bin", path);
    }
    m.write_for(&args.out)?;
    Ok(())
}

/// Inserts `_a<antenna>` before the extension: `series.csv` ->
/// `series_a0.csv`.
fn series_path(base: &Path, antenna: usize) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}_a{antenna}{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_parser() {
        assert_eq!(parse_bins("0,2,5-8").unwrap(), vec![0, 2, 5, 6, 7, 8]);
        assert_eq!(parse_bins("3").unwrap(), vec![3]);
        assert_eq!(parse_bins("4-4,1").unwrap(), vec![1, 4]);
        assert!(parse_bins("8-5").is_err());
        assert!(parse_bins("a").is_err());
        assert!(parse_bins("").is_err());
    }

    #[test]
    fn series_paths() {
        assert_eq!(
            series_path(Path::new("out/series.csv"), 2),
            Path::new("out/series_a2.csv")
        );
        assert_eq!(series_path(Path::new("series"), 0), Path::new("series_a0"));
    }

    #[test]
    fn cli_shape_is_valid() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
