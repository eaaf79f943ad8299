use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

/// Far-field source built from random tones so every microphone signal is
/// an exact fractional delay of the same waveform.
fn tone_source(azimuth_deg: f64, len: usize, seed: u64, noise_rms: f64) -> MultichannelAudioFrame {
    let array = MicArrayGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tones: Vec<(f64, f64)> = (0..80)
        .map(|_| (rng.random_range(300.0..3400.0), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let fs = 16_000.0;
    let channels = (0..4)
        .map(|m| {
            let tau = array.positions()[m] * azimuth_deg.to_radians().sin() / 343.0;
            (0..len)
                .map(|n| {
                    let t = n as f64 / fs - tau;
                    let s: f64 = tones.iter().map(|(f, ph)| (std::f64::consts::TAU * f * t + ph).sin()).sum();
                    0.02 * s + noise_rms * rng.random_range(-1.7320508..1.7320508)
                })
                .collect()
        })
        .collect();
    MultichannelAudioFrame::new(channels, 16_000, 0.0).unwrap()
}

#[test]
fn broadside_source_peaks_at_zero() {
    let frame = tone_source(0.0, 512, 1, 0.0);
    let pdf = compute_ssl_pdf(&frame, &MicArrayGeometry::default(), AzimuthGrid::default()).unwrap();
    assert_eq!(pdf.argmax_deg(), 0.0);
    assert!((pdf.values.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn thirty_degree_source_within_one_step() {
    for seed in 0..5 {
        let frame = tone_source(30.0, 512, seed, 0.0);
        let pdf = compute_ssl_pdf(&frame, &MicArrayGeometry::default(), AzimuthGrid::default()).unwrap();
        assert!((pdf.argmax_deg() - 30.0).abs() <= 1.0, "seed {seed}: {}", pdf.argmax_deg());
    }
}

#[test]
fn uncorrelated_noise_is_nearly_flat_over_a_second() {
    let array = MicArrayGeometry::default();
    let grid = AzimuthGrid::default();
    let proc = SslProcessor::new(&array, grid, 512, 16_000, SslConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut acc = vec![0.0; grid.len()];
    for _ in 0..31 {
        let channels = (0..4).map(|_| (0..512).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let pdf = proc.process(&MultichannelAudioFrame::new(channels, 16_000, 0.0).unwrap()).unwrap();
        acc.iter_mut().zip(&pdf.values).for_each(|(a, v)| *a += v);
    }
    let max = acc.iter().cloned().fold(f64::MIN, f64::max);
    let min = acc.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min < 1.5, "ratio {}", max / min);
}

#[test]
fn silent_frame_gives_uniform_pdf() {
    let frame = MultichannelAudioFrame::silent(4, 512, 16_000, 0.0);
    let pdf = compute_ssl_pdf(&frame, &MicArrayGeometry::default(), AzimuthGrid::default()).unwrap();
    assert_eq!(pdf, SslPdf::uniform(AzimuthGrid::default()));
}

#[test]
fn channel_and_length_errors() {
    let array = MicArrayGeometry::default();
    let three = MultichannelAudioFrame::silent(3, 512, 16_000, 0.0);
    assert!(matches!(
        compute_ssl_pdf(&three, &array, AzimuthGrid::default()),
        Err(crate::Error::ChannelMismatch { expected: 4, got: 3 })
    ));
    let short = MultichannelAudioFrame::silent(4, 5, 16_000, 0.0);
    assert!(matches!(
        compute_ssl_pdf(&short, &array, AzimuthGrid::default()),
        Err(crate::Error::FrameTooShort { .. })
    ));
}

fn stats_fixture() -> SslWindowStats {
    SslWindowStats {
        g_min: 0.1,
        g_max: 0.9,
        g_avg: 0.3,
        l_max: 0.9,
        l_min: 0.2,
        l_avg: 0.4333,
        l_mid: 0.9,
        epsilon_rel: DEFAULT_EPSILON_REL,
    }
}

#[test]
fn hand_evaluated_fixture() {
    let f = stats_fixture().features();
    // Hand evaluation of each ratio.
    let expected = [
        1.0,
        0.125,
        (0.4333 - 0.1) / 0.8,
        1.0,
        4.5,
        0.9 / 0.4333,
        0.2 / 0.4333,
        0.2 / 0.3,
        0.7 / 0.4333,
        1.0,
        0.2 / 0.9,
        0.4333 / 0.9,
        1.0,
        0.7 / 0.9,
        1.0,
    ];
    for (i, (got, want)) in f.0.iter().zip(expected).enumerate() {
        assert!((got - want).abs() < 1e-9, "f{}: {got} vs {want}", i + 1);
    }
    assert!((f.f(8) - 0.6667).abs() < 1e-4);
    assert!((f.f(14) - 0.7778).abs() < 1e-4);
}

#[test]
fn flat_pdf_hits_degenerate_rules() {
    let pdf = SslPdf::uniform(AzimuthGrid::default());
    let f = extract_ssl_features(&pdf, (-10.0, 10.0), DEFAULT_EPSILON_REL).unwrap();
    for n in 1..=4 {
        assert_eq!(f.f(n), 0.5);
    }
    for n in [5, 6, 7] {
        assert!((f.f(n) - 1.0).abs() < 1e-12);
    }
    assert_eq!(f.f(9), 0.0);
    assert_eq!(f.f(14), 0.0);
    assert_eq!(f.f(15), 1.0);
}

#[test]
fn span_outside_grid_is_an_error() {
    let pdf = SslPdf::uniform(AzimuthGrid::default());
    assert!(matches!(
        extract_ssl_features(&pdf, (60.0, 70.0), DEFAULT_EPSILON_REL),
        Err(crate::Error::EmptySpan { .. })
    ));
    // Narrower than a bin but on the grid: nearest bin.
    let mut values = vec![0.0; 101];
    values[60] = 1.0;
    let pdf = SslPdf { grid: AzimuthGrid::default(), values };
    let f = extract_ssl_features(&pdf, (10.2, 10.4), DEFAULT_EPSILON_REL).unwrap();
    assert_eq!(f.f(10), 1.0);
}

#[test]
fn gate_threshold_edges() {
    assert!(!speech_activity_gate(&MultichannelAudioFrame::silent(4, 512, 16_000, 0.0), 0.01));
    let sine: Vec<f64> = (0..512).map(|n| (n as f64 * 0.3).sin()).collect();
    let full = MultichannelAudioFrame::new(vec![sine; 4], 16_000, 0.0).unwrap();
    assert!(speech_activity_gate(&full, 0.5));

    // Constant-magnitude square wave has RMS equal to its amplitude.
    let threshold = 0.05;
    let square = |amp: f64| {
        let c: Vec<f64> = (0..512).map(|n| if n % 2 == 0 { amp } else { -amp }).collect();
        MultichannelAudioFrame::new(vec![c; 4], 16_000, 0.0).unwrap()
    };
    assert!(speech_activity_gate(&square(threshold * 1.001), threshold));
    assert!(!speech_activity_gate(&square(threshold * 0.999), threshold));
}

fn random_pdf() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 101)
}

proptest! {
    #[test]
    fn features_are_scale_invariant(values in random_pdf(), c in 0.01f64..100.0, lo in -50.0f64..40.0, w in 1.0f64..20.0) {
        let grid = AzimuthGrid::default();
        let a = SslPdf { grid, values: values.clone() };
        let b = SslPdf { grid, values: values.iter().map(|v| v * c).collect() };
        let fa = extract_ssl_features(&a, (lo, lo + w), DEFAULT_EPSILON_REL).unwrap();
        let fb = extract_ssl_features(&b, (lo, lo + w), DEFAULT_EPSILON_REL).unwrap();
        for (x, y) in fa.0.iter().zip(fb.0.iter()) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn relative_features_ignore_offsets(values in random_pdf(), k in 0.0f64..5.0, lo in -50.0f64..40.0) {
        let grid = AzimuthGrid::default();
        let base = SslWindowStats::from_pdf(&SslPdf { grid, values: values.clone() }, (lo, lo + 8.0), 1e-3).unwrap();
        let shifted = SslWindowStats::from_pdf(
            &SslPdf { grid, values: values.iter().map(|v| v + k).collect() }, (lo, lo + 8.0), 1e-3).unwrap();
        let (fa, fb) = (base.features(), shifted.features());
        for n in 1..=4 {
            prop_assert!((fa.f(n) - fb.f(n)).abs() < 1e-9);
        }
    }

    #[test]
    fn feature_orderings(values in random_pdf(), lo in -50.0f64..45.0, w in 0.0f64..30.0) {
        let pdf = SslPdf { grid: AzimuthGrid::default(), values };
        let f = extract_ssl_features(&pdf, (lo, lo + w), DEFAULT_EPSILON_REL).unwrap();
        prop_assert!(f.f(11) <= f.f(12) + 1e-12 && f.f(12) <= f.f(10) + 1e-12);
        prop_assert!(f.f(2) <= f.f(3) + 1e-12 && f.f(3) <= f.f(1) + 1e-12);
        for n in (1..=4).chain(10..=13) {
            prop_assert!((0.0..=1.0).contains(&f.f(n)));
        }
    }

    #[test]
    fn pdf_is_normalized(az in -50.0f64..50.0, seed in 0u64..1000) {
        let frame = tone_source(az, 512, seed, 0.01);
        let pdf = compute_ssl_pdf(&frame, &MicArrayGeometry::default(), AzimuthGrid::default()).unwrap();
        prop_assert!((pdf.values.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        prop_assert!(pdf.values.iter().all(|v| *v >= 0.0));
    }
}
