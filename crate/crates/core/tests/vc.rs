use proptest::prelude::*;
use vcd_core::asd::{AsdResult, CandidateRegion, CandidateSource};
use vcd_core::geometry::{BBox, CameraIntrinsics};
use vcd_core::vc::{vc_step, CropWindow, VcInput, VcMode, VcParams, VcState};
use vcd_core::vision::TableExtent;
use vcd_core::Error;

const W: u32 = 320;
const H: u32 = 180;
const DT: f64 = 0.05;

fn cam() -> CameraIntrinsics {
    CameraIntrinsics::from_hfov(W as usize, H as usize, 100.0, 1.0).unwrap()
}

/// Three people spread across the frame.
fn people() -> Vec<CandidateRegion> {
    let cam = cam();
    [40.0, 160.0, 280.0]
        .iter()
        .enumerate()
        .map(|(id, &u)| {
            let b = BBox::from_center(u, 70.0, 16.0, 20.0);
            let az = cam.azimuth_of_column(u);
            CandidateRegion {
                id,
                bbox: Some(b),
                span: (az - 2.0, az + 2.0),
                depth_m: 2.5,
                confidence: 1.0,
                source: CandidateSource::Detector,
            }
        })
        .collect()
}

fn asd(sel: Option<usize>) -> AsdResult {
    match sel {
        Some(s) => AsdResult { scores: vec![0.0; 3], selected: Some(s), fired: true },
        None => AsdResult::silent(vec![0.0; 3]),
    }
}

/// Runs `who(t)` frame by frame and returns (t, mode) per frame.
fn trace(until: f64, who: impl Fn(f64) -> Option<usize>) -> Vec<(f64, VcMode, CropWindow)> {
    let (cam, p, cands) = (cam(), VcParams::default(), people());
    let mut state = VcState::new(W, H);
    let n = (until / DT).round() as usize;
    (0..=n)
        .map(|i| {
            let t = i as f64 * DT;
            let a = asd(who(t));
            let input = VcInput { asd: &a, candidates: &cands, table: &TableExtent::Absent, t };
            let crop = vc_step(&mut state, input, &cam, &p).unwrap();
            (t, state.mode, crop)
        })
        .collect()
}

fn cut_times(tr: &[(f64, VcMode, CropWindow)]) -> Vec<f64> {
    tr.iter().filter(|r| r.1 == VcMode::UpdateCut).map(|r| r.0).collect()
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-6
}

#[test]
fn first_cut_waits_for_confirmation() {
    let tr = trace(1.0, |_| Some(0));
    let cuts = cut_times(&tr);
    assert_eq!(cuts.len(), 1);
    assert!(near(cuts[0], 0.15), "{cuts:?}");
    let crop = tr.last().unwrap().2;
    assert!(crop.coverage(&people()[0].bbox.unwrap()) > 0.99);
}

#[test]
fn switch_is_cut_after_confirmation() {
    let tr = trace(12.0, |t| Some(if t < 10.0 - 1e-9 { 0 } else { 1 }));
    let cuts = cut_times(&tr);
    assert_eq!(cuts.len(), 2, "{cuts:?}");
    assert!(near(cuts[1], 10.15), "{cuts:?}");
}

#[test]
fn one_frame_flicker_does_not_restart_the_wait() {
    let tr = trace(12.0, |t| {
        if t < 10.0 - 1e-9 {
            Some(0)
        } else if near(t, 10.05) {
            Some(2)
        } else {
            Some(1)
        }
    });
    let cuts = cut_times(&tr);
    assert!(near(cuts[1], 10.15), "{cuts:?}");
}

#[test]
fn switch_waits_for_minimum_shot() {
    let tr = trace(4.0, |t| Some(if t < 0.5 - 1e-9 { 0 } else { 1 }));
    let cuts = cut_times(&tr);
    assert!(near(cuts[0], 0.15) && near(cuts[1], 2.15), "{cuts:?}");
}

#[test]
fn long_silence_goes_global() {
    let tr = trace(8.0, |t| (t < 1.0 - 1e-9).then_some(0));
    let globals: Vec<f64> = tr.iter().filter(|r| r.1 == VcMode::UpdateGlobal).map(|r| r.0).collect();
    // Last firing at 0.95.
    assert_eq!(globals.len(), 1, "{globals:?}");
    assert!(near(globals[0], 5.95), "{globals:?}");
    assert_eq!(tr.last().unwrap().2, CropWindow::full(W, H));
}

#[test]
fn short_pause_keeps_the_shot() {
    let tr = trace(8.0, |t| (!(2.0..6.0).contains(&t)).then_some(0));
    assert!(tr.iter().all(|r| r.1 != VcMode::UpdateGlobal));
    assert_eq!(cut_times(&tr).len(), 1);
}

#[test]
fn time_must_not_go_back() {
    let (cam, p, cands) = (cam(), VcParams::default(), people());
    let mut state = VcState::new(W, H);
    let a = asd(Some(0));
    vc_step(&mut state, VcInput { asd: &a, candidates: &cands, table: &TableExtent::Absent, t: 1.0 }, &cam, &p).unwrap();
    let err = vc_step(&mut state, VcInput { asd: &a, candidates: &cands, table: &TableExtent::Absent, t: 0.5 }, &cam, &p);
    assert!(matches!(err, Err(Error::TimestampRegression { .. })));
}

#[test]
fn unknown_selection_is_an_error() {
    let (cam, p, cands) = (cam(), VcParams::default(), people());
    let mut state = VcState::new(W, H);
    let a = asd(Some(7));
    assert!(vc_step(&mut state, VcInput { asd: &a, candidates: &cands, table: &TableExtent::Absent, t: 0.0 }, &cam, &p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn crops_stay_inside_and_shots_stay_long(picks in prop::collection::vec(prop::option::weighted(0.8, 0usize..3), 50..400)) {
        let p = VcParams::default();
        let tr = trace(picks.len() as f64 * DT, |t| picks[((t / DT).round() as usize).min(picks.len() - 1)]);
        for r in &tr {
            prop_assert!(r.2.inside(W, H) && r.2.width > 0 && r.2.height > 0);
        }
        let cuts = cut_times(&tr);
        for w in cuts.windows(2) {
            prop_assert!(w[1] - w[0] >= p.t_min_shot - 1e-6);
        }
    }
}
