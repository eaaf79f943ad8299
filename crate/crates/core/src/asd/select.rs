#[derive(Debug, Clone, PartialEq)]
pub struct AsdResult {
    /// Margin per candidate, indexed by candidate id.
    pub scores: Vec<f64>,
    pub selected: Option<usize>,
    pub fired: bool,
}

impl AsdResult {
    pub fn silent(scores: Vec<f64>) -> Self {
        Self { scores, selected: None, fired: false }
    }
}

/// Fires when the gate is open and the best margin reaches `theta_fire`;
/// equal margins go to the lowest id.
pub fn select_speaker(margins: &[f64], theta_fire: f64, speech_gate: bool) -> AsdResult {
    let mut best: Option<usize> = None;
    for (i, m) in margins.iter().enumerate() {
        if best.is_none_or(|b| *m > margins[b]) {
            best = Some(i);
        }
    }
    let fired = speech_gate && best.is_some_and(|b| margins[b] >= theta_fire);
    AsdResult { scores: margins.to_vec(), selected: if fired { best } else { None }, fired }
}

/// One validation frame for threshold calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationFrame {
    pub margins: Vec<f64>,
    /// Whether each candidate counts as the true speaker.
    pub correct: Vec<bool>,
    pub speech: bool,
    pub gate: bool,
}

/// Outcome of firing at a given threshold over a validation set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operating {
    pub theta: f64,
    pub sdr: f64,
    pub fnr: f64,
}

fn evaluate(frames: &[CalibrationFrame], theta: f64) -> Operating {
    let (mut speech, mut hit, mut miss) = (0usize, 0usize, 0usize);
    for f in frames {
        let r = select_speaker(&f.margins, theta, f.gate);
        if f.speech {
            speech += 1;
            match r.selected {
                Some(s) if f.correct[s] => hit += 1,
                Some(_) => {}
                None => miss += 1,
            }
        }
    }
    let sdr = if speech == 0 { 0.0 } else { hit as f64 / speech as f64 };
    let fnr = if frames.is_empty() { 0.0 } else { miss as f64 / frames.len() as f64 };
    Operating { theta, sdr, fnr }
}

/// Firing threshold with the best speaker-detection rate among those whose
/// miss rate stays within `max_fnr`; ties go to the larger threshold. When
/// no threshold qualifies the lowest candidate is returned.
pub fn calibrate_theta(frames: &[CalibrationFrame], max_fnr: f64) -> Operating {
    let mut cands: Vec<f64> = frames
        .iter()
        .filter(|f| f.gate)
        .filter_map(|f| f.margins.iter().copied().fold(None, |a: Option<f64>, m| Some(a.map_or(m, |a| a.max(m)))))
        .collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    if cands.is_empty() {
        return evaluate(frames, 0.0);
    }
    let mut best: Option<Operating> = None;
    for &theta in &cands {
        let op = evaluate(frames, theta);
        if op.fnr <= max_fnr && best.is_none_or(|b| op.sdr >= b.sdr) {
            best = Some(op);
        }
    }
    best.unwrap_or_else(|| evaluate(frames, cands[0]))
}
