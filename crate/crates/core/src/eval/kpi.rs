//! Detection and framing rates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::sim::{GroundTruthFrame, ParticipantTruth, RoomClass};
use crate::vc::{percentile, CropWindow, LatencyStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KpiConfig {
    pub iou_thresh: f64,
    pub azimuth_tol_deg: f64,
    /// Share of a head box the crop must contain to be acceptable.
    pub containment: f64,
}

impl Default for KpiConfig {
    fn default() -> Self {
        Self { iou_thresh: 0.5, azimuth_tol_deg: 5.0, containment: 0.9 }
    }
}

/// What the system chose for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePrediction {
    pub timestamp: f64,
    pub fired: bool,
    /// Selected candidate's box and azimuth when fired.
    pub selected: Option<(Option<BBox>, f64)>,
    pub crop: CropWindow,
}

/// Frame counts behind each rate. Merging adds counts, so pooled rates are
/// frame-weighted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KpiCounts {
    pub frames: usize,
    pub speech_frames: usize,
    pub speaker_hits: usize,
    pub person_hits: usize,
    pub not_fired: usize,
    pub acceptable: usize,
}

fn ratio(n: usize, d: usize) -> Option<f64> {
    (d > 0).then(|| n as f64 / d as f64)
}

impl KpiCounts {
    pub fn sdr(&self) -> Option<f64> {
        ratio(self.speaker_hits, self.speech_frames)
    }

    pub fn pdr(&self) -> Option<f64> {
        ratio(self.person_hits, self.speech_frames)
    }

    pub fn fnr(&self) -> Option<f64> {
        ratio(self.not_fired, self.frames)
    }

    pub fn asr(&self) -> Option<f64> {
        ratio(self.acceptable, self.frames)
    }

    pub fn merge(&mut self, o: &KpiCounts) {
        self.frames += o.frames;
        self.speech_frames += o.speech_frames;
        self.speaker_hits += o.speaker_hits;
        self.person_hits += o.person_hits;
        self.not_fired += o.not_fired;
        self.acceptable += o.acceptable;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LatencySummary {
    pub latencies_ms: Vec<f64>,
    pub suppressed: usize,
    pub missed: usize,
}

impl LatencySummary {
    pub fn p50_ms(&self) -> Option<f64> {
        percentile(&self.latencies_ms, 50.0)
    }

    pub fn p95_ms(&self) -> Option<f64> {
        percentile(&self.latencies_ms, 95.0)
    }
}

impl From<&LatencyStats> for LatencySummary {
    fn from(s: &LatencyStats) -> Self {
        Self { latencies_ms: s.latencies_ms.clone(), suppressed: s.suppressed, missed: s.missed }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KpiReport {
    pub total: KpiCounts,
    pub per_class: BTreeMap<RoomClass, KpiCounts>,
    pub latency: LatencySummary,
}

fn matches(sel: &(Option<BBox>, f64), p: &ParticipantTruth, cfg: &KpiConfig) -> bool {
    sel.0.is_some_and(|b| b.iou(&p.bbox) >= cfg.iou_thresh) || (sel.1 - p.azimuth_deg).abs() <= cfg.azimuth_tol_deg
}

/// Counts for one aligned prediction/truth sequence.
pub fn compute_kpis(
    predictions: &[FramePrediction],
    truth: &[GroundTruthFrame],
    frame: (u32, u32),
    cfg: &KpiConfig,
) -> Result<KpiCounts> {
    if predictions.len() != truth.len() {
        return Err(Error::Invalid(format!("{} predictions for {} truth frames", predictions.len(), truth.len())));
    }
    if !(cfg.iou_thresh > 0.0 && cfg.iou_thresh <= 1.0) {
        return Err(Error::Invalid(format!("iou threshold {} outside (0, 1]", cfg.iou_thresh)));
    }
    let mut c = KpiCounts { frames: predictions.len(), ..Default::default() };
    for (pred, gt) in predictions.iter().zip(truth) {
        let speaker = gt.speaker_truth();
        if let Some(sp) = speaker {
            c.speech_frames += 1;
            match pred.selected.filter(|_| pred.fired) {
                Some(sel) => {
                    if matches(&sel, sp, cfg) {
                        c.speaker_hits += 1;
                    }
                    if gt.participants.iter().any(|p| matches(&sel, p, cfg)) {
                        c.person_hits += 1;
                    }
                }
                None => c.not_fired += 1,
            }
        }
        let ok = match speaker {
            Some(sp) => pred.crop.coverage(&sp.bbox) >= cfg.containment,
            None if gt.participants.is_empty() => pred.crop.is_full(frame.0, frame.1),
            None => gt.participants.iter().any(|p| pred.crop.coverage(&p.bbox) >= cfg.containment),
        };
        if ok {
            c.acceptable += 1;
        }
    }
    Ok(c)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "na".to_string(), |v| v.to_string())
}

impl KpiReport {
    pub fn add(&mut self, class: RoomClass, counts: &KpiCounts, latency: &LatencySummary) {
        self.total.merge(counts);
        self.per_class.entry(class).or_default().merge(counts);
        self.latency.latencies_ms.extend_from_slice(&latency.latencies_ms);
        self.latency.suppressed += latency.suppressed;
        self.latency.missed += latency.missed;
    }

    pub fn merge(&mut self, o: &KpiReport) {
        self.total.merge(&o.total);
        for (k, v) in &o.per_class {
            self.per_class.entry(*k).or_default().merge(v);
        }
        self.latency.latencies_ms.extend_from_slice(&o.latency.latencies_ms);
        self.latency.suppressed += o.latency.suppressed;
        self.latency.missed += o.latency.missed;
    }

    /// `key = value` lines; absent rates read `na`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut block = |suffix: &str, c: &KpiCounts| {
            let _ = writeln!(s, "sdr{suffix} = {}", fmt_opt(c.sdr()));
            let _ = writeln!(s, "pdr{suffix} = {}", fmt_opt(c.pdr()));
            let _ = writeln!(s, "fnr{suffix} = {}", fmt_opt(c.fnr()));
            let _ = writeln!(s, "asr{suffix} = {}", fmt_opt(c.asr()));
            let _ = writeln!(s, "frames{suffix} = {}", c.frames);
            let _ = writeln!(s, "speech_frames{suffix} = {}", c.speech_frames);
            let _ = writeln!(s, "speaker_hits{suffix} = {}", c.speaker_hits);
            let _ = writeln!(s, "person_hits{suffix} = {}", c.person_hits);
            let _ = writeln!(s, "not_fired{suffix} = {}", c.not_fired);
            let _ = writeln!(s, "acceptable{suffix} = {}", c.acceptable);
        };
        block("", &self.total);
        for (class, c) in &self.per_class {
            block(&format!("_{}", class.as_str()), c);
        }
        let l = &self.latency;
        let _ = writeln!(s, "latency_p50_ms = {}", fmt_opt(l.p50_ms()));
        let _ = writeln!(s, "latency_p95_ms = {}", fmt_opt(l.p95_ms()));
        let _ = writeln!(s, "latency_suppressed = {}", l.suppressed);
        let _ = writeln!(s, "latency_missed = {}", l.missed);
        let list: Vec<String> = l.latencies_ms.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "latency_ms = {}", if list.is_empty() { "na".into() } else { list.join(",") });
        s
    }

    /// Inverse of [`KpiReport::to_text`]. Rates are recomputed from the
    /// counts and must agree with the stored values.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::parse_at(i + 1, "expected `key = value`"))?;
            if kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::parse_at(i + 1, format!("duplicate key `{}`", k.trim())));
            }
        }
        let mut take = |key: &str| kv.remove(key).ok_or_else(|| Error::parse(format!("missing key `{key}`")));
        let count = |(line, v): (usize, String)| v.parse::<usize>().map_err(|_| Error::parse_at(line, format!("bad count `{v}`")));
        let read_block = |take: &mut dyn FnMut(&str) -> Result<(usize, String)>, suffix: &str| -> Result<KpiCounts> {
            let c = KpiCounts {
                frames: count(take(&format!("frames{suffix}"))?)?,
                speech_frames: count(take(&format!("speech_frames{suffix}"))?)?,
                speaker_hits: count(take(&format!("speaker_hits{suffix}"))?)?,
                person_hits: count(take(&format!("person_hits{suffix}"))?)?,
                not_fired: count(take(&format!("not_fired{suffix}"))?)?,
                acceptable: count(take(&format!("acceptable{suffix}"))?)?,
            };
            if c.speaker_hits > c.person_hits
                || c.person_hits + c.not_fired > c.speech_frames
                || c.speech_frames > c.frames
                || c.acceptable > c.frames
            {
                return Err(Error::parse(format!("inconsistent counts{suffix}")));
            }
            for (name, want) in [("sdr", c.sdr()), ("pdr", c.pdr()), ("fnr", c.fnr()), ("asr", c.asr())] {
                let (line, v) = take(&format!("{name}{suffix}"))?;
                let got = if v == "na" { None } else { Some(v.parse::<f64>().map_err(|_| Error::parse_at(line, format!("bad rate `{v}`")))?) };
                let same = match (got, want) {
                    (None, None) => true,
                    (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
                    _ => false,
                };
                if !same {
                    return Err(Error::parse_at(line, format!("{name}{suffix} disagrees with its counts")));
                }
            }
            Ok(c)
        };
        let total = read_block(&mut take, "")?;
        let mut per_class = BTreeMap::new();
        for class in RoomClass::ALL {
            let suffix = format!("_{}", class.as_str());
            if kv.contains_key(&format!("frames{suffix}")) {
                let mut take = |key: &str| kv.remove(key).ok_or_else(|| Error::parse(format!("missing key `{key}`")));
                per_class.insert(class, read_block(&mut take, &suffix)?);
            }
        }
        let mut take = |key: &str| kv.remove(key).ok_or_else(|| Error::parse(format!("missing key `{key}`")));
        let suppressed = count(take("latency_suppressed")?)?;
        let missed = count(take("latency_missed")?)?;
        let (line, list) = take("latency_ms")?;
        let latencies_ms = if list == "na" {
            Vec::new()
        } else {
            list.split(',')
                .map(|v| v.trim().parse::<f64>().ok().filter(|x| x.is_finite() && *x >= 0.0))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::parse_at(line, "bad latency list"))?
        };
        let latency = LatencySummary { latencies_ms, suppressed, missed };
        for (key, want) in [("latency_p50_ms", latency.p50_ms()), ("latency_p95_ms", latency.p95_ms())] {
            let (line, v) = take(key)?;
            let ok = match want {
                None => v == "na",
                Some(w) => v.parse::<f64>().is_ok_and(|x| x == w),
            };
            if !ok {
                return Err(Error::parse_at(line, format!("{key} disagrees with the latency list")));
            }
        }
        if let Some(k) = kv.keys().next() {
            return Err(Error::parse(format!("unknown key `{k}`")));
        }
        Ok(Self { total, per_class, latency })
    }
}
