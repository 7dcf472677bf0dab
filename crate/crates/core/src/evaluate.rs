//! Pearson-correlation diagnostics comparing amplitude profiles before and
//! after correction.
//!
//! For each antenna the bin with the largest time-averaged amplitude is
//! selected, and the correlation between temperature and that bin's
//! amplitude series is computed for the uncorrected (`pr_ap`) and corrected
//! (`pr_tcap`) tensors. The headline statistic is the per-antenna reduction
//! `1 - |pr_tcap| / |pr_ap|`. Correlations that are undefined (constant
//! series, or fewer than two frames) are reported as `NA` rather than 0.

use std::path::Path;

use crate::datacube::{AmplitudeTensor, TemperatureLog};
use crate::error::{Error, Result};

/// Per-antenna correlation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaReport {
    pub antenna: usize,
    pub peak_bin: usize,
    pub pr_ap: Option<f64>,
    pub pr_tcap: Option<f64>,
    /// `1 - |pr_tcap| / |pr_ap|`; `None` when either correlation is
    /// undefined or `pr_ap` is zero.
    pub reduction: Option<f64>,
}

/// Correlations for one (antenna, bin) cell of the full table.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCorrelation {
    pub antenna: usize,
    pub bin: usize,
    pub pr_ap: Option<f64>,
    pub pr_tcap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub antennas: Vec<AntennaReport>,
    pub per_bin: Vec<BinCorrelation>,
    /// Absolute index of the first evaluated frame; nonzero when a trailing
    /// slice of a longer capture was scored. Offsets the series output.
    pub first_frame: usize,
}

/// Sample Pearson correlation via the two-pass centered formula. Symmetric
/// in its arguments down to the last bit and clamped into `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            reason: format!("series lengths differ: {} vs {}", x.len(), y.len()),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::UndefinedCorrelation {
            reason: format!("need at least 2 samples, got {n}"),
        });
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::UndefinedCorrelation {
            reason: "zero variance".into(),
        });
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// The bin with the largest time-averaged amplitude for one antenna; ties
/// break toward the lowest index.
pub fn peak_bin(ap: &AmplitudeTensor, antenna: usize) -> Result<usize> {
    if antenna >= ap.num_antennas() {
        return Err(Error::AntennaOutOfRange {
            antenna,
            num_antennas: ap.num_antennas(),
        });
    }
    if ap.num_frames() == 0 {
        return Err(Error::EmptyInput {
            context: "peak bin of a zero-frame tensor".into(),
        });
    }
    let mut best_bin = 0;
    let mut best = f64::NEG_INFINITY;
    for b in 0..ap.num_bins() {
        let mean = (0..ap.num_frames())
            .map(|f| ap.value(f, antenna, b))
            .sum::<f64>()
            / ap.num_frames() as f64;
        if mean > best {
            best = mean;
            best_bin = b;
        }
    }
    Ok(best_bin)
}

fn correlate(temps: &[f64], series: &[f64]) -> Result<Option<f64>> {
    match pearson(temps, series) {
        Ok(r) => Ok(Some(r)),
        Err(Error::UndefinedCorrelation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Scores corrected against uncorrected profiles. Peak bins are chosen from
/// the uncorrected tensor. Undefined correlations are recorded as `None`,
/// not treated as fatal.
pub fn evaluate(
    ap: &AmplitudeTensor,
    tcap: &AmplitudeTensor,
    temps: &TemperatureLog,
) -> Result<EvaluationReport> {
    if ap.num_frames() != tcap.num_frames()
        || ap.num_antennas() != tcap.num_antennas()
        || ap.num_bins() != tcap.num_bins()
    {
        return Err(Error::DimensionMismatch {
            reason: "corrected and uncorrected tensors have different shapes".into(),
        });
    }
    if ap.num_frames() != temps.len() {
        return Err(Error::FrameCountMismatch {
            left: "amplitude tensor",
            left_frames: ap.num_frames(),
            right: "temperature log",
            right_frames: temps.len(),
        });
    }
    if ap.num_frames() == 0 {
        return Err(Error::EmptyInput {
            context: "evaluation of a zero-frame tensor".into(),
        });
    }
    let frames = ap.num_frames();
    let series = |t: &AmplitudeTensor, a: usize, b: usize| -> Vec<f64> {
        (0..frames).map(|f| t.value(f, a, b)).collect()
    };
    let mut antennas = Vec::with_capacity(ap.num_antennas());
    let mut per_bin = Vec::with_capacity(ap.num_antennas() * ap.num_bins());
    for a in 0..ap.num_antennas() {
        let peak = peak_bin(ap, a)?;
        let pr_ap = correlate(temps.temps(), &series(ap, a, peak))?;
        let pr_tcap = correlate(temps.temps(), &series(tcap, a, peak))?;
        let reduction = match (pr_ap, pr_tcap) {
            (Some(ra), Some(rt)) if ra != 0.0 => Some(1.0 - rt.abs() / ra.abs()),
            _ => None,
        };
        antennas.push(AntennaReport {
            antenna: a,
            peak_bin: peak,
            pr_ap,
            pr_tcap,
            reduction,
        });
        for b in 0..ap.num_bins() {
            per_bin.push(BinCorrelation {
                antenna: a,
                bin: b,
                pr_ap: correlate(temps.temps(), &series(ap, a, b))?,
                pr_tcap: correlate(temps.temps(), &series(tcap, a, b))?,
            });
        }
    }
    Ok(EvaluationReport {
        antennas,
        per_bin,
        first_frame: 0,
    })
}

/// Formats with `digits` significant digits, trimming trailing zeros;
/// matches C's `%g` for the values this crate emits.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("numeric exponent");
    if exp >= -4 && exp < digits as i32 {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_sig(v, 6),
        None => "NA".into(),
    }
}

pub const REPORT_HEADER: &str = "antenna,peak_bin,pr_ap,pr_tcap,reduction";
pub const PER_BIN_HEADER: &str = "antenna,bin,pr_ap,pr_tcap";
pub const SERIES_HEADER: &str = "frame,temp_c,ap_peak,tcap_peak";

/// The summary table as CSV, one row per antenna, 6 significant digits.
pub fn render_report(report: &EvaluationReport) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in &report.antennas {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.antenna,
            r.peak_bin,
            fmt_cell(r.pr_ap),
            fmt_cell(r.pr_tcap),
            fmt_cell(r.reduction)
        ));
    }
    out
}

pub fn write_report(report: &EvaluationReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_report(report)).map_err(|e| Error::io(path, e))
}

/// The full per-bin correlation table as CSV.
pub fn render_per_bin(report: &EvaluationReport) -> String {
    let mut out = String::from(PER_BIN_HEADER);
    out.push('\n');
    for r in &report.per_bin {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.antenna,
            r.bin,
            fmt_cell(r.pr_ap),
            fmt_cell(r.pr_tcap)
        ));
    }
    out
}

/// Per-frame peak-bin series for one antenna as CSV, full precision, frame
/// indices offset by `first_frame`.
pub fn render_series(
    ap: &AmplitudeTensor,
    tcap: &AmplitudeTensor,
    temps: &TemperatureLog,
    antenna: usize,
    bin: usize,
    first_frame: usize,
) -> Result<String> {
    if antenna >= ap.num_antennas() {
        return Err(Error::AntennaOutOfRange {
            antenna,
            num_antennas: ap.num_antennas(),
        });
    }
    if bin >= ap.num_bins() || ap.num_frames() != tcap.num_frames() {
        return Err(Error::DimensionMismatch {
            reason: "series request does not match tensor shape".into(),
        });
    }
    if ap.num_frames() != temps.len() {
        return Err(Error::FrameCountMismatch {
            left: "amplitude tensor",
            left_frames: ap.num_frames(),
            right: "temperature log",
            right_frames: temps.len(),
        });
    }
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for f in 0..ap.num_frames() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            first_frame + f,
            temps.get(f),
            ap.value(f, antenna, bin),
            tcap.value(f, antenna, bin)
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
        (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn self_correlation_is_one() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn exact_affine_anticorrelation() {
        let x: Vec<f64> = (0..16).map(|i| 30.0 + i as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 5.0 - 0.1 * t).collect();
        assert_close(pearson(&x, &y).unwrap(), -1.0, 1e-15);
    }

    #[test]
    fn pearson_is_bitwise_symmetric() {
        for seed in 0..20 {
            let x = pseudo_random(200, seed);
            let y = pseudo_random(200, seed + 1000);
            assert_eq!(pearson(&x, &y).unwrap(), pearson(&y, &x).unwrap());
        }
    }

    #[test]
    fn pearson_affine_invariance() {
        let x = pseudo_random(500, 3);
        let y = pseudo_random(500, 4);
        let base = pearson(&x, &y).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| 2.5 * v + 7.0).collect();
        assert_close(pearson(&shifted, &y).unwrap(), base, 1e-12);
        let flipped: Vec<f64> = x.iter().map(|v| -0.5 * v + 1.0).collect();
        assert_close(pearson(&flipped, &y).unwrap(), -base, 1e-12);
    }

    #[test]
    fn pearson_stays_in_unit_interval() {
        for seed in 0..50 {
            let x = pseudo_random(50, seed);
            let y = pseudo_random(50, seed + 99);
            assert!(pearson(&x, &y).unwrap().abs() <= 1.0);
        }
    }

    #[test]
    fn pearson_error_cases() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            pearson(&[1.0], &[1.0]),
            Err(Error::UndefinedCorrelation { .. })
        ));
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation { .. })
        ));
    }

    #[test]
    fn peak_bin_rules() {
        // bin 2 dominates on average despite a tie elsewhere
        let values = vec![
            0.1, 0.1, 0.9, 0.1, //
            0.1, 0.1, 0.7, 0.1,
        ];
        let ap = AmplitudeTensor::new(2, 1, 4, values).unwrap();
        assert_eq!(peak_bin(&ap, 0).unwrap(), 2);

        let flat = AmplitudeTensor::new(1, 1, 4, vec![0.5; 4]).unwrap();
        assert_eq!(peak_bin(&flat, 0).unwrap(), 0);

        let single = AmplitudeTensor::new(1, 1, 3, vec![0.1, 0.3, 0.2]).unwrap();
        assert_eq!(peak_bin(&single, 0).unwrap(), 1);

        assert!(matches!(
            peak_bin(&flat, 5),
            Err(Error::AntennaOutOfRange { .. })
        ));
        let empty = AmplitudeTensor::new(0, 1, 4, vec![]).unwrap();
        assert!(matches!(peak_bin(&empty, 0), Err(Error::EmptyInput { .. })));
    }

    fn drift_pair(frames: usize) -> (AmplitudeTensor, AmplitudeTensor, TemperatureLog) {
        let temps: Vec<f64> = (0..frames)
            .map(|i| 30.0 + 15.0 * i as f64 / (frames - 1) as f64)
            .collect();
        let mut ap_vals = Vec::new();
        let mut tcap_vals = Vec::new();
        for &t in &temps {
            // peak at bin 1 drifts with T in ap, flat in tcap
            ap_vals.extend_from_slice(&[0.05, 2.0 - 0.01 * t]);
            tcap_vals.extend_from_slice(&[0.05, 1.625]);
        }
        (
            AmplitudeTensor::new(frames, 1, 2, ap_vals).unwrap(),
            AmplitudeTensor::new(frames, 1, 2, tcap_vals).unwrap(),
            TemperatureLog::new(temps).unwrap(),
        )
    }

    #[test]
    fn evaluate_reports_drift_and_reduction() {
        let (ap, tcap, temps) = drift_pair(32);
        let report = evaluate(&ap, &tcap, &temps).unwrap();
        assert_eq!(report.antennas.len(), 1);
        let r = &report.antennas[0];
        assert_eq!(r.peak_bin, 1);
        assert_close(r.pr_ap.unwrap(), -1.0, 1e-12);
        // corrected series is constant: correlation undefined, not zero
        assert_eq!(r.pr_tcap, None);
        assert_eq!(r.reduction, None);
        assert_eq!(report.per_bin.len(), 2);
    }

    #[test]
    fn evaluate_identity_comparison_gives_zero_reduction() {
        let (ap, _, temps) = drift_pair(32);
        let report = evaluate(&ap, &ap, &temps).unwrap();
        let r = &report.antennas[0];
        assert_eq!(r.pr_ap, r.pr_tcap);
        assert_close(r.reduction.unwrap(), 0.0, 1e-15);
    }

    #[test]
    fn evaluate_rejects_mismatched_shapes() {
        let (ap, tcap, temps) = drift_pair(8);
        let wrong = AmplitudeTensor::new(8, 1, 3, vec![0.1; 24]).unwrap();
        assert!(matches!(
            evaluate(&ap, &wrong, &temps),
            Err(Error::DimensionMismatch { .. })
        ));
        let short = TemperatureLog::new(vec![30.0; 7]).unwrap();
        assert!(matches!(
            evaluate(&ap, &tcap, &short),
            Err(Error::FrameCountMismatch { .. })
        ));
    }

    #[test]
    fn report_rendering() {
        let report = EvaluationReport {
            antennas: vec![
                AntennaReport {
                    antenna: 0,
                    peak_bin: 4,
                    pr_ap: Some(0.99),
                    pr_tcap: Some(-0.16),
                    reduction: Some(0.8383838383838385),
                },
                AntennaReport {
                    antenna: 1,
                    peak_bin: 4,
                    pr_ap: Some(0.98),
                    pr_tcap: None,
                    reduction: None,
                },
            ],
            per_bin: vec![BinCorrelation {
                antenna: 0,
                bin: 0,
                pr_ap: Some(1.0),
                pr_tcap: Some(0.123456789),
            }],
            first_frame: 0,
        };
        let csv = render_report(&report);
        assert_eq!(
            csv,
            "antenna,peak_bin,pr_ap,pr_tcap,reduction\n\
             0,4,0.99,-0.16,0.838384\n\
             1,4,0.98,NA,NA\n"
        );
        let per_bin = render_per_bin(&report);
        assert_eq!(per_bin, "antenna,bin,pr_ap,pr_tcap\n0,0,1,0.123457\n");
    }

    #[test]
    fn series_rendering_offsets_frames() {
        let (ap, tcap, temps) = drift_pair(3);
        let csv = render_series(&ap, &tcap, &temps, 0, 1, 100).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SERIES_HEADER);
        assert!(lines[1].starts_with("100,30,"));
        assert!(lines[3].starts_with("102,45,"));
        assert_eq!(lines.len(), 4);
        assert!(render_series(&ap, &tcap, &temps, 3, 1, 0).is_err());
        assert!(render_series(&ap, &tcap, &temps, 0, 9, 0).is_err());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(1.0, 6), "1");
        assert_eq!(fmt_sig(-0.99, 6), "-0.99");
        assert_eq!(fmt_sig(0.16, 6), "0.16");
        assert_eq!(fmt_sig(0.838384, 6), "0.838384");
        assert_eq!(fmt_sig(1.23456789, 6), "1.23457");
        assert_eq!(fmt_sig(123456.789, 6), "123457");
        assert_eq!(fmt_sig(0.000123456, 6), "0.000123456");
        assert_eq!(fmt_sig(0.0000001234567, 6), "1.23457e-7");
        assert_eq!(fmt_sig(12345678.9, 6), "1.23457e7");
    }
}
