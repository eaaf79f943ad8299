use proptest::prelude::*;
use vcd_core::audio_ssl::*;
use vcd_core::sim::far_field_frame;

fn processor(array: &MicArrayGeometry) -> SslProcessor {
    SslProcessor::new(array, AzimuthGrid::default(), DEFAULT_FRAME_LEN, DEFAULT_SAMPLE_RATE, SslConfig::default()).unwrap()
}

#[test]
fn sweep_across_the_field_of_view() {
    let array = MicArrayGeometry::default();
    let proc = processor(&array);
    for (i, az) in (-50..=50).step_by(5).enumerate() {
        let frame = far_field_frame(&array, az as f64, DEFAULT_SAMPLE_RATE, DEFAULT_FRAME_LEN, 20.0, i as u64).unwrap();
        let got = proc.process(&frame).unwrap().argmax_deg();
        assert!((got - az as f64).abs() <= 5.0, "source at {az}, peak at {got}");
    }
}

#[test]
fn peak_window_holds_the_global_max() {
    let array = MicArrayGeometry::default();
    let frame = far_field_frame(&array, 20.0, DEFAULT_SAMPLE_RATE, DEFAULT_FRAME_LEN, 20.0, 9).unwrap();
    let pdf = compute_ssl_pdf(&frame, &array, AzimuthGrid::default()).unwrap();
    let on = extract_ssl_features(&pdf, (15.0, 25.0), DEFAULT_EPSILON_REL).unwrap();
    let off = extract_ssl_features(&pdf, (-40.0, -30.0), DEFAULT_EPSILON_REL).unwrap();
    assert!(on.holds_global_max());
    assert!(!off.holds_global_max());
}

#[test]
fn gate_follows_level() {
    let array = MicArrayGeometry::default();
    let loud = far_field_frame(&array, 0.0, DEFAULT_SAMPLE_RATE, DEFAULT_FRAME_LEN, 20.0, 1).unwrap();
    let quiet = MultichannelAudioFrame::silent(array.len(), DEFAULT_FRAME_LEN, DEFAULT_SAMPLE_RATE, 0.0);
    assert!(speech_activity_gate(&loud, 0.02));
    assert!(!speech_activity_gate(&quiet, 0.02));
}

#[test]
fn channel_count_must_match_the_array() {
    let array = MicArrayGeometry::default();
    let frame = MultichannelAudioFrame::silent(2, DEFAULT_FRAME_LEN, DEFAULT_SAMPLE_RATE, 0.0);
    assert!(compute_ssl_pdf(&frame, &array, AzimuthGrid::default()).is_err());
}

#[test]
fn delta_pdf_features() {
    let pdf = SslPdf::delta(AzimuthGrid::default(), 10.0);
    let inside = extract_ssl_features(&pdf, (8.0, 12.0), DEFAULT_EPSILON_REL).unwrap();
    assert!(inside.holds_global_max());
    let outside = extract_ssl_features(&pdf, (-12.0, -8.0), DEFAULT_EPSILON_REL).unwrap();
    assert!(!outside.holds_global_max());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shifting_moves_the_peak(az in -30.0f64..30.0, by in -15.0f64..15.0) {
        let grid = AzimuthGrid::default();
        let pdf = SslPdf::delta(grid, az);
        let moved = pdf.shifted(by);
        let want = grid.angle(grid.nearest_bin(pdf.argmax_deg() + (by / grid.step_deg).round() * grid.step_deg));
        prop_assert!((moved.argmax_deg() - want).abs() < 1e-9);
        prop_assert!((moved.values.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn noisy_frames_give_valid_pdfs(az in -50.0f64..50.0, snr in 0.0f64..30.0, seed in any::<u64>()) {
        let array = MicArrayGeometry::default();
        let frame = far_field_frame(&array, az, DEFAULT_SAMPLE_RATE, DEFAULT_FRAME_LEN, snr, seed).unwrap();
        let pdf = compute_ssl_pdf(&frame, &array, AzimuthGrid::default()).unwrap();
        prop_assert!(pdf.values.iter().all(|v| v.is_finite() && *v >= 0.0));
        prop_assert!((pdf.values.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
