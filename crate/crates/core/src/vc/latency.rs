//! Speaker-change to cut latency.

/// A ground-truth change to a new speaker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeakerChange {
    pub t: f64,
    pub participant: usize,
}

/// A framing change. `framed` lists the participants the new shot counts
/// as showing. A shot can frame nobody, e.g. after a false detection.
#[derive(Debug, Clone, PartialEq)]
pub struct CutEvent {
    pub t: f64,
    pub framed: Vec<usize>,
    /// Zoom-out to the whole frame; does not start a shot.
    pub global: bool,
}

impl CutEvent {
    pub fn to(t: f64, participant: usize) -> Self {
        Self::shot(t, vec![participant])
    }

    pub fn shot(t: f64, framed: Vec<usize>) -> Self {
        Self { t, framed, global: false }
    }

    pub fn global(t: f64) -> Self {
        Self { t, framed: Vec::new(), global: true }
    }

    pub fn frames(&self, participant: usize) -> bool {
        self.framed.contains(&participant)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LatencyStats {
    /// Milliseconds per matched change, in change order.
    pub latencies_ms: Vec<f64>,
    /// Changes where the minimum shot length forbade a timely cut.
    pub suppressed: usize,
    /// Changes never cut to before the next change.
    pub missed: usize,
    pub p50_ms: Option<f64>,
    pub p95_ms: Option<f64>,
}

/// Nearest-rank percentile of an unsorted sample.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    Some(v[rank.min(v.len()) - 1])
}

/// Matches each change with the first cut to the new speaker before the
/// next change. A speaker already framed at the change counts as 0 ms.
/// When the previous cut was too recent for a cut at `t + t_confirm`, the
/// change is counted as suppressed instead.
pub fn measure_decision_latency(changes: &[SpeakerChange], cuts: &[CutEvent], t_confirm: f64, t_min_shot: f64) -> LatencyStats {
    let mut out = LatencyStats::default();
    for (i, ch) in changes.iter().enumerate() {
        let until = changes.get(i + 1).map_or(f64::INFINITY, |n| n.t);
        let before = cuts.iter().rev().find(|c| c.t <= ch.t);
        if before.is_some_and(|c| c.frames(ch.participant)) {
            out.latencies_ms.push(0.0);
            continue;
        }
        let last_real_cut = cuts
            .iter()
            .rev()
            .find(|c| c.t < ch.t + t_confirm - 1e-9 && !c.global && !c.frames(ch.participant));
        if last_real_cut.is_some_and(|c| c.t + t_min_shot > ch.t + t_confirm + 1e-9) {
            out.suppressed += 1;
            continue;
        }
        match cuts.iter().find(|c| c.t >= ch.t && c.t < until && c.frames(ch.participant)) {
            // Rounded to the microsecond so frame-grid arithmetic stays exact.
            Some(c) => out.latencies_ms.push(((c.t - ch.t) * 1e6).round() / 1e3),
            None => out.missed += 1,
        }
    }
    out.p50_ms = percentile(&out.latencies_ms, 50.0);
    out.p95_ms = percentile(&out.latencies_ms, 95.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(t: f64, p: usize) -> SpeakerChange {
        SpeakerChange { t, participant: p }
    }

    fn cut(t: f64, p: usize) -> CutEvent {
        CutEvent::to(t, p)
    }

    #[test]
    fn single_change() {
        let s = measure_decision_latency(&[ch(10.0, 1)], &[cut(2.0, 0), cut(10.15, 1)], 0.15, 2.0);
        assert_eq!(s.latencies_ms.len(), 1);
        assert!((s.latencies_ms[0] - 150.0).abs() < 1e-9);
    }

    #[test]
    fn no_cuts_no_stats() {
        let s = measure_decision_latency(&[], &[], 0.15, 2.0);
        assert!(s.latencies_ms.is_empty() && s.p95_ms.is_none() && s.p50_ms.is_none());
    }

    #[test]
    fn two_changes_p95() {
        let s = measure_decision_latency(&[ch(10.0, 1), ch(20.0, 2)], &[cut(10.12, 1), cut(20.18, 2)], 0.15, 2.0);
        assert!(s.p95_ms.unwrap() <= 180.0 + 1e-9);
        assert!((s.p50_ms.unwrap() - 120.0).abs() < 1e-9);
    }

    #[test]
    fn recent_cut_suppresses() {
        let s = measure_decision_latency(&[ch(10.0, 1), ch(11.0, 2)], &[cut(10.15, 1), cut(12.15, 2)], 0.15, 2.0);
        assert_eq!((s.latencies_ms.len(), s.suppressed, s.missed), (1, 1, 0));
    }

    #[test]
    fn already_framed_is_zero() {
        let s = measure_decision_latency(&[ch(10.0, 1)], &[cut(5.0, 1)], 0.15, 2.0);
        assert_eq!(s.latencies_ms, vec![0.0]);
    }

    #[test]
    fn global_view_does_not_frame_anyone() {
        let s = measure_decision_latency(&[ch(10.0, 1)], &[cut(2.0, 1), CutEvent::global(8.0), cut(10.2, 1)], 0.15, 2.0);
        assert_eq!(s.latencies_ms, vec![200.0]);
    }

    #[test]
    fn shot_showing_two_people_frames_both() {
        let both = CutEvent::shot(10.15, vec![1, 2]);
        let s = measure_decision_latency(&[ch(10.0, 2)], &[cut(1.0, 0), both], 0.15, 2.0);
        assert_eq!(s.latencies_ms, vec![150.0]);
    }

    #[test]
    fn shot_of_nobody_still_blocks() {
        let s = measure_decision_latency(&[ch(10.0, 1)], &[cut(2.0, 0), CutEvent::shot(9.0, vec![]), cut(11.0, 1)], 0.15, 2.0);
        assert_eq!((s.latencies_ms.len(), s.suppressed), (0, 1));
    }

    #[test]
    fn nearest_rank() {
        assert_eq!(percentile(&[5.0, 1.0, 3.0], 50.0), Some(3.0));
        assert_eq!(percentile(&[1.0; 20].iter().chain(&[9.0]).copied().collect::<Vec<_>>(), 95.0), Some(1.0));
        assert_eq!(percentile(&[1.0, 9.0], 95.0), Some(9.0));
    }
}
