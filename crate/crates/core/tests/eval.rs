use std::collections::BTreeMap;

use proptest::prelude::*;
use vcd_core::eval::*;
use vcd_core::geometry::BBox;
use vcd_core::sim::{GroundTruthFrame, ParticipantTruth, RoomClass};
use vcd_core::vc::CropWindow;

const FRAME: (u32, u32) = (320, 180);

fn person(id: usize, x: f64, az: f64) -> ParticipantTruth {
    ParticipantTruth { id, bbox: BBox::new(x, 40.0, 20.0, 20.0), azimuth_deg: az, depth_m: 2.0 }
}

fn gt(t: f64, speaker: Option<usize>, people: &[ParticipantTruth]) -> GroundTruthFrame {
    GroundTruthFrame { timestamp: t, speaker, participants: people.to_vec() }
}

fn pred(t: f64, sel: Option<&ParticipantTruth>, crop: CropWindow) -> FramePrediction {
    FramePrediction { timestamp: t, fired: sel.is_some(), selected: sel.map(|p| (Some(p.bbox), p.azimuth_deg)), crop }
}

#[test]
fn counts_on_a_short_meeting() {
    let people = [person(0, 40.0, -30.0), person(1, 200.0, 30.0)];
    let on = |x| CropWindow { x, y: 20, width: 80, height: 45 };
    // Right, right, wrong person, silent frame held on nobody, miss.
    let preds = [
        pred(0.0, Some(&people[0]), on(20)),
        pred(0.1, Some(&people[0]), on(20)),
        pred(0.2, Some(&people[1]), on(180)),
        pred(0.3, None, on(100)),
        pred(0.4, None, on(20)),
    ];
    let truth = [
        gt(0.0, Some(0), &people),
        gt(0.1, Some(0), &people),
        gt(0.2, Some(0), &people),
        gt(0.3, None, &people),
        gt(0.4, Some(0), &people),
    ];
    let c = compute_kpis(&preds, &truth, FRAME, &KpiConfig::default()).unwrap();
    assert_eq!(
        c,
        KpiCounts { frames: 5, speech_frames: 4, speaker_hits: 2, person_hits: 3, not_fired: 1, acceptable: 3 }
    );
    assert_eq!(c.sdr(), Some(0.5));
    assert_eq!(c.pdr(), Some(0.75));
    assert_eq!(c.fnr(), Some(0.2));
    assert_eq!(c.asr(), Some(0.6));
}

#[test]
fn azimuth_alone_can_match() {
    let p = person(0, 40.0, -30.0);
    let preds = [FramePrediction { timestamp: 0.0, fired: true, selected: Some((None, -26.0)), crop: CropWindow::full(320, 180) }];
    let c = compute_kpis(&preds, &[gt(0.0, Some(0), &[p])], FRAME, &KpiConfig::default()).unwrap();
    assert_eq!(c.speaker_hits, 1);
}

#[test]
fn no_speech_leaves_detection_rates_undefined() {
    let preds = [pred(0.0, None, CropWindow::full(320, 180))];
    let c = compute_kpis(&preds, &[gt(0.0, None, &[])], FRAME, &KpiConfig::default()).unwrap();
    assert_eq!((c.sdr(), c.pdr()), (None, None));
    // An empty room wants the whole frame.
    assert_eq!(c.asr(), Some(1.0));
    assert_eq!(c.fnr(), Some(0.0));
}

#[test]
fn misaligned_inputs_are_rejected() {
    let preds = [pred(0.0, None, CropWindow::full(320, 180))];
    assert!(compute_kpis(&preds, &[], FRAME, &KpiConfig::default()).is_err());
    let bad = KpiConfig { iou_thresh: 0.0, ..KpiConfig::default() };
    assert!(compute_kpis(&preds, &[gt(0.0, None, &[])], FRAME, &bad).is_err());
}

#[test]
fn report_text_round_trip() {
    let mut r = KpiReport::default();
    let small = KpiCounts { frames: 10, speech_frames: 8, speaker_hits: 6, person_hits: 7, not_fired: 1, acceptable: 9 };
    let large = KpiCounts { frames: 4, speech_frames: 0, speaker_hits: 0, person_hits: 0, not_fired: 0, acceptable: 4 };
    let lat = LatencySummary { latencies_ms: vec![150.0, 200.0], suppressed: 1, missed: 0 };
    r.add(RoomClass::Small, &small, &lat);
    r.add(RoomClass::Large, &large, &LatencySummary::default());
    let back = KpiReport::from_text(&r.to_text()).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.latency.p95_ms(), Some(200.0));
}

#[test]
fn report_text_rejects_tampering() {
    let mut r = KpiReport::default();
    let c = KpiCounts { frames: 10, speech_frames: 8, speaker_hits: 6, person_hits: 7, not_fired: 1, acceptable: 9 };
    r.add(RoomClass::Medium, &c, &LatencySummary::default());
    let text = r.to_text();
    assert!(KpiReport::from_text(&text.replace("sdr = 0.75", "sdr = 0.8")).is_err());
    assert!(KpiReport::from_text(&text.replace("speaker_hits = 6", "speaker_hits = 8")).is_err());
    assert!(KpiReport::from_text("sdr 1").is_err());
}

#[test]
fn folds_partition_everything() {
    let folds = fold_partition(12, 4, 3).unwrap();
    let mut all: Vec<usize> = folds.concat();
    all.sort_unstable();
    assert_eq!(all, (0..12).collect::<Vec<_>>());
    assert!(folds.iter().all(|f| f.len() == 3));
    assert_eq!(folds, fold_partition(12, 4, 3).unwrap());
    assert!(fold_partition(12, 1, 0).is_err());
    assert!(fold_partition(3, 4, 0).is_err());
}

fn ann(annotator: usize, boxes: Vec<BBox>, speaker: Option<usize>) -> Annotation {
    Annotation { annotator, frame: 0, boxes, speaker }
}

#[test]
fn two_annotators_agree() {
    let a = BBox::new(10.0, 10.0, 20.0, 20.0);
    let b = BBox::new(12.0, 10.0, 20.0, 20.0);
    let c = aggregate_labels(&[ann(0, vec![a], Some(0)), ann(1, vec![b], Some(0))], 0.5);
    assert_eq!(c.boxes, vec![BBox::new(11.0, 10.0, 20.0, 20.0)]);
    assert_eq!(c.speaker, Some(0));
    assert!(c.speaker_agreed && !c.needs_more);
}

#[test]
fn lone_box_needs_another_look() {
    let a = BBox::new(10.0, 10.0, 20.0, 20.0);
    let far = BBox::new(200.0, 100.0, 20.0, 20.0);
    let c = aggregate_labels(&[ann(0, vec![a, far], None), ann(1, vec![a], None)], 0.5);
    assert_eq!(c.boxes, vec![a]);
    assert!(c.speaker_agreed && c.speaker.is_none());
    assert!(c.needs_more);
}

#[test]
fn one_annotator_twice_is_not_agreement() {
    let a = BBox::new(10.0, 10.0, 20.0, 20.0);
    let c = aggregate_labels(&[ann(0, vec![a], Some(0)), ann(0, vec![a], Some(0))], 0.5);
    assert!(c.boxes.is_empty() && c.needs_more && !c.speaker_agreed);
}

#[test]
fn speaker_disagreement_is_flagged() {
    let a = BBox::new(10.0, 10.0, 20.0, 20.0);
    let b = BBox::new(100.0, 10.0, 20.0, 20.0);
    let c = aggregate_labels(&[ann(0, vec![a, b], Some(0)), ann(1, vec![a, b], Some(1))], 0.5);
    assert_eq!(c.boxes.len(), 2);
    assert!(!c.speaker_agreed && c.needs_more);
}

fn key(frame: usize, boxes: &[(usize, BBox)]) -> Keyframe {
    Keyframe { frame, boxes: boxes.iter().copied().collect::<BTreeMap<_, _>>() }
}

#[test]
fn interpolation_covers_every_frame() {
    let a = BBox::new(0.0, 0.0, 10.0, 10.0);
    let b = BBox::new(20.0, 10.0, 10.0, 10.0);
    let out = interpolate_labels(&[key(0, &[(0, a)]), key(4, &[(0, b)])], 0.5).unwrap();
    assert_eq!(out.labels.iter().map(|l| l.frame).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    assert_eq!(out.labels[1].boxes[&0], BBox::new(5.0, 2.5, 10.0, 10.0));
    assert!(out.queue.is_empty());
}

#[test]
fn interpolation_input_checks() {
    let a = BBox::new(0.0, 0.0, 10.0, 10.0);
    assert!(interpolate_labels(&[key(0, &[(0, a)])], 0.5).is_err());
    assert!(interpolate_labels(&[key(3, &[(0, a)]), key(3, &[(0, a)])], 0.5).is_err());
}

fn frames_strategy() -> impl Strategy<Value = (Vec<FramePrediction>, Vec<GroundTruthFrame>)> {
    let people = prop::collection::vec((0.0f64..300.0, 0.0f64..160.0, -50.0f64..50.0), 0..4);
    people.prop_flat_map(|ps| {
        let k = ps.len();
        let frame = (
            prop::option::of(0..k.max(1)),
            prop::option::of((0.0f64..300.0, 0.0f64..160.0, -50.0f64..50.0)),
            0u32..200,
            0u32..100,
        );
        (Just(ps), prop::collection::vec(frame, 1..40))
    })
    .prop_map(|(ps, frames)| {
        let people: Vec<ParticipantTruth> = ps
            .iter()
            .enumerate()
            .map(|(id, &(x, y, az))| ParticipantTruth { id, bbox: BBox::new(x, y, 15.0, 18.0), azimuth_deg: az, depth_m: 2.0 })
            .collect();
        let mut preds = Vec::new();
        let mut truth = Vec::new();
        for (i, (sp, sel, x, y)) in frames.into_iter().enumerate() {
            let t = i as f64;
            let sp = sp.filter(|s| *s < people.len());
            let selected = sel.map(|(x, y, az)| (Some(BBox::new(x, y, 15.0, 18.0)), az));
            preds.push(FramePrediction { timestamp: t, fired: selected.is_some(), selected, crop: CropWindow { x, y, width: 120, height: 68 } });
            truth.push(GroundTruthFrame { timestamp: t, speaker: sp, participants: people.clone() });
        }
        (preds, truth)
    })
}

proptest! {
    #[test]
    fn rates_are_ordered((preds, truth) in frames_strategy()) {
        let c = compute_kpis(&preds, &truth, FRAME, &KpiConfig::default()).unwrap();
        prop_assert!(c.speaker_hits <= c.person_hits);
        prop_assert!(c.person_hits + c.not_fired <= c.speech_frames);
        if let (Some(s), Some(p)) = (c.sdr(), c.pdr()) {
            prop_assert!(s <= p);
        }
        for r in [c.sdr(), c.pdr(), c.fnr(), c.asr()].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn folds_are_balanced(n in 2usize..60, k in 2usize..10, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = fold_partition(n, k, seed).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all = folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn mismatched_keyframes_are_rejected() {
    let a = BBox::new(0.0, 0.0, 10.0, 10.0);
    assert!(interpolate_labels(&[key(0, &[(0, a)]), key(5, &[(1, a)])], 0.5).is_err());
}

proptest! {
    #[test]
    fn misses_never_exceed_speech((preds, truth) in frames_strategy()) {
        let c = compute_kpis(&preds, &truth, FRAME, &KpiConfig::default()).unwrap();
        if let Some(fnr) = c.fnr() {
            prop_assert!(fnr <= c.speech_frames as f64 / c.frames as f64 + 1e-12);
        }
    }

    #[test]
    fn frame_order_does_not_matter((preds, truth) in frames_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut idx: Vec<usize> = (0..preds.len()).collect();
        idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let p2: Vec<_> = idx.iter().map(|&i| preds[i]).collect();
        let t2: Vec<_> = idx.iter().map(|&i| truth[i].clone()).collect();
        let cfg = KpiConfig::default();
        prop_assert_eq!(compute_kpis(&preds, &truth, FRAME, &cfg).unwrap(), compute_kpis(&p2, &t2, FRAME, &cfg).unwrap());
    }

    #[test]
    fn needs_more_flag_ignores_annotator_order(
        boxes in prop::collection::vec(prop::collection::vec((0.0f64..50.0, 0.0f64..50.0, 5.0f64..20.0), 0..3), 1..4),
    ) {
        let anns: Vec<Annotation> = boxes
            .iter()
            .enumerate()
            .map(|(i, bs)| ann(i, bs.iter().map(|&(x, y, s)| BBox::new(x, y, s, s)).collect(), None))
            .collect();
        let mut rev = anns.clone();
        rev.reverse();
        prop_assert_eq!(aggregate_labels(&anns, 0.5).needs_more, aggregate_labels(&rev, 0.5).needs_more);
    }
}
