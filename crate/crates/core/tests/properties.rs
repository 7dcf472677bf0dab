//! Randomized invariants over the public API.

use num_complex::Complex64;
use proptest::prelude::*;
use radarcal_core::{
    peak_bin, pearson, positive_spectrum, read_amplitude_tensor, read_temperature_log, remove_dc,
    train_boundary, write_amplitude_tensor, write_temperature_log, AmplitudeTensor, Spectrum,
    TemperatureLog,
};

fn finite(range: std::ops::Range<f64>) -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL.prop_map(move |v| {
        let unit = (v.abs() % 1.0 + 1.0) % 1.0;
        range.start + unit * (range.end - range.start)
    })
}

proptest! {
    #[test]
    fn removing_dc_zeroes_the_mean(
        res in prop::collection::vec(finite(-100.0..100.0), 1..64),
        ims in prop::collection::vec(finite(-100.0..100.0), 1..64),
    ) {
        let n = res.len().min(ims.len());
        let chirp: Vec<Complex64> = res[..n]
            .iter()
            .zip(&ims[..n])
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let centered = remove_dc(&chirp);
        prop_assert_eq!(centered.len(), n);
        let mean = centered.iter().sum::<Complex64>() / n as f64;
        let scale = chirp.iter().map(|c| c.norm()).fold(1.0, f64::max);
        prop_assert!(mean.norm() <= 1e-12 * scale, "residual mean {}", mean.norm());
    }

    #[test]
    fn truncation_keeps_the_lower_half(
        res in prop::collection::vec(finite(-10.0..10.0), 2..65),
    ) {
        let n = res.len() & !1;
        let chirp: Vec<Complex64> = res[..n].iter().map(|&re| Complex64::new(re, 0.1)).collect();
        let spectrum: Spectrum = radarcal_core::fft_normalized(&chirp);
        let half = positive_spectrum(&spectrum);
        prop_assert_eq!(half.len(), n / 2);
        for (kept, full) in half.iter().zip(spectrum.bins()) {
            prop_assert_eq!(kept.re.to_bits(), (full.re * 2.0).to_bits());
            prop_assert_eq!(kept.im.to_bits(), (full.im * 2.0).to_bits());
        }
    }

    #[test]
    fn correlation_is_symmetric_and_bounded(
        pairs in prop::collection::vec((finite(-50.0..50.0), finite(-50.0..50.0)), 2..40),
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        match (pearson(&xs, &ys), pearson(&ys, &xs)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.to_bits(), b.to_bits());
                prop_assert!(a.abs() <= 1.0);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "asymmetric outcome: {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn split_boundary_stays_in_range(frames in 0usize..10_000, fraction in 0.0001f64..0.9999) {
        let boundary = train_boundary(frames, fraction).unwrap();
        prop_assert!(boundary <= frames);
        let expected = (frames as f64 * fraction).floor() as usize;
        prop_assert_eq!(boundary, expected);
    }

    #[test]
    fn bad_fractions_are_rejected(fraction in prop::num::f64::ANY) {
        prop_assume!(!(fraction.is_finite() && 0.0 < fraction && fraction < 1.0));
        prop_assert!(train_boundary(100, fraction).is_err());
    }

    #[test]
    fn temperature_log_round_trips_bit_exactly(
        temps in prop::collection::vec(finite(-80.0..200.0), 1..50),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("temps.csv");
        let log = TemperatureLog::new(temps.clone()).unwrap();
        write_temperature_log(&log, &path).unwrap();
        let reread = read_temperature_log(&path).unwrap();
        prop_assert_eq!(reread.len(), temps.len());
        for (a, b) in reread.temps().iter().zip(&temps) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn amplitude_tensor_round_trips_bit_exactly(
        values in prop::collection::vec(finite(0.0..1e6), 1..60),
        antennas in 1usize..4,
    ) {
        let bins = values.len().div_euclid(antennas).max(1);
        let frames = 1;
        let needed = frames * antennas * bins;
        prop_assume!(values.len() >= needed);
        let tensor =
            AmplitudeTensor::new(frames, antennas, bins, values[..needed].to_vec()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ap.rap");
        write_amplitude_tensor(&tensor, &path).unwrap();
        let reread = read_amplitude_tensor(&path).unwrap();
        for (a, b) in reread.values().iter().zip(tensor.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn peak_bin_is_the_argmax_of_the_time_average(
        values in prop::collection::vec(finite(0.0..10.0), 24..120),
    ) {
        let bins = 8;
        let frames = values.len() / bins;
        let tensor = AmplitudeTensor::new(frames, 1, bins, values[..frames * bins].to_vec())
            .unwrap();
        let peak = peak_bin(&tensor, 0).unwrap();
        let mean = |b: usize| -> f64 {
            (0..frames).map(|f| tensor.value(f, 0, b)).sum::<f64>() / frames as f64
        };
        for b in 0..bins {
            prop_assert!(mean(b) <= mean(peak), "bin {} beats reported peak {}", b, peak);
        }
    }
}
