//! Delimited per-frame records: ground truth, predictions, decisions and
//! annotations. Every file starts with a header row; rows with a variable
//! number of participants or boxes repeat a fixed group of columns.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::{Annotation, FramePrediction};
use crate::geometry::BBox;
use crate::sim::{GroundTruthFrame, ParticipantTruth};
use crate::vc::{CropWindow, DecisionRecord, VcMode};

pub const TRUTH_HEADER: &[&str] = &["timestamp", "speaker", "id", "x", "y", "w", "h", "azimuth_deg", "depth_m"];
pub const PREDICTION_HEADER: &[&str] =
    &["timestamp", "fired", "x", "y", "w", "h", "azimuth_deg", "crop_x", "crop_y", "crop_w", "crop_h"];
pub const DECISION_HEADER: &[&str] = &["timestamp", "mode", "target", "x", "y", "width", "height"];
pub const ANNOTATION_HEADER: &[&str] = &["annotator", "frame", "speaker", "x", "y", "w", "h"];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().flexible(true).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

/// Data rows with their 1-based line numbers, after checking the header.
fn rows(text: &str, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut r = csv::ReaderBuilder::new().flexible(true).has_headers(false).from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut seen_header = false;
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<String> = rec.iter().map(|f| f.trim().to_string()).collect();
        if !seen_header {
            if fields.len() != header.len() || fields.iter().zip(header).any(|(a, b)| a != b) {
                return Err(Error::parse_at(line, format!("expected header `{}`", header.join(","))));
            }
            seen_header = true;
            continue;
        }
        out.push((line, fields));
    }
    if !seen_header {
        return Err(Error::parse("missing header row"));
    }
    Ok(out)
}

fn num<T: FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::parse_at(line, format!("bad {what} `{field}`")))
}

fn finite(line: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = num(line, field, what)?;
    if !v.is_finite() {
        return Err(Error::parse_at(line, format!("{what} must be finite")));
    }
    Ok(v)
}

fn opt<T: FromStr>(line: usize, field: &str, what: &str) -> Result<Option<T>> {
    if field.is_empty() {
        Ok(None)
    } else {
        num(line, field, what).map(Some)
    }
}

fn bbox(line: usize, f: &[String]) -> Result<BBox> {
    let v = [finite(line, &f[0], "x")?, finite(line, &f[1], "y")?, finite(line, &f[2], "w")?, finite(line, &f[3], "h")?];
    if v[2] < 0.0 || v[3] < 0.0 {
        return Err(Error::parse_at(line, "box sides must be non-negative"));
    }
    Ok(BBox::new(v[0], v[1], v[2], v[3]))
}

fn crop(line: usize, f: &[String]) -> Result<CropWindow> {
    Ok(CropWindow {
        x: num(line, &f[0], "crop x")?,
        y: num(line, &f[1], "crop y")?,
        width: num(line, &f[2], "crop width")?,
        height: num(line, &f[3], "crop height")?,
    })
}

fn opt_str<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn check_time(line: usize, t: f64, prev: &mut Option<f64>) -> Result<()> {
    if prev.is_some_and(|p| t < p) {
        return Err(Error::parse_at(line, "timestamps must not decrease"));
    }
    *prev = Some(t);
    Ok(())
}

/// One row per frame: timestamp, speaker id (empty for silence), then
/// seven columns per participant.
pub fn encode_truth(frames: &[GroundTruthFrame]) -> Result<String> {
    let mut w = writer();
    w.write_record(TRUTH_HEADER).map_err(csv_err)?;
    for f in frames {
        let mut rec = vec![f.timestamp.to_string(), opt_str(f.speaker)];
        for p in &f.participants {
            let b = p.bbox;
            rec.push(p.id.to_string());
            rec.extend([b.x, b.y, b.w, b.h, p.azimuth_deg, p.depth_m].iter().map(|v| v.to_string()));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

pub fn parse_truth(text: &str) -> Result<Vec<GroundTruthFrame>> {
    let mut out = Vec::new();
    let mut prev = None;
    for (line, f) in rows(text, TRUTH_HEADER)? {
        if f.len() < 2 || (f.len() - 2) % 7 != 0 {
            return Err(Error::parse_at(line, "expected timestamp, speaker and 7 columns per participant"));
        }
        let timestamp = finite(line, &f[0], "timestamp")?;
        check_time(line, timestamp, &mut prev)?;
        let speaker: Option<usize> = opt(line, &f[1], "speaker")?;
        let mut participants = Vec::new();
        for g in f[2..].chunks(7) {
            let id: usize = num(line, &g[0], "participant id")?;
            if participants.iter().any(|p: &ParticipantTruth| p.id == id) {
                return Err(Error::parse_at(line, format!("participant {id} repeated")));
            }
            participants.push(ParticipantTruth {
                id,
                bbox: bbox(line, &g[1..5])?,
                azimuth_deg: finite(line, &g[5], "azimuth")?,
                depth_m: finite(line, &g[6], "depth")?,
            });
        }
        if speaker.is_some_and(|s| !participants.iter().any(|p| p.id == s)) {
            return Err(Error::parse_at(line, "speaker is not among the participants"));
        }
        out.push(GroundTruthFrame { timestamp, participants, speaker });
    }
    Ok(out)
}

pub fn encode_predictions(preds: &[FramePrediction]) -> Result<String> {
    let mut w = writer();
    w.write_record(PREDICTION_HEADER).map_err(csv_err)?;
    for p in preds {
        let sel = p.selected.filter(|_| p.fired);
        let b = sel.and_then(|s| s.0);
        let c = p.crop;
        let rec = [
            p.timestamp.to_string(),
            u8::from(p.fired).to_string(),
            opt_str(b.map(|b| b.x)),
            opt_str(b.map(|b| b.y)),
            opt_str(b.map(|b| b.w)),
            opt_str(b.map(|b| b.h)),
            opt_str(sel.map(|s| s.1)),
            c.x.to_string(),
            c.y.to_string(),
            c.width.to_string(),
            c.height.to_string(),
        ];
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

pub fn parse_predictions(text: &str) -> Result<Vec<FramePrediction>> {
    let mut out = Vec::new();
    let mut prev = None;
    for (line, f) in rows(text, PREDICTION_HEADER)? {
        if f.len() != PREDICTION_HEADER.len() {
            return Err(Error::parse_at(line, format!("expected {} columns", PREDICTION_HEADER.len())));
        }
        let timestamp = finite(line, &f[0], "timestamp")?;
        check_time(line, timestamp, &mut prev)?;
        let fired = match f[1].as_str() {
            "1" => true,
            "0" => false,
            v => return Err(Error::parse_at(line, format!("bad fired flag `{v}`"))),
        };
        let has_box = f[2..6].iter().all(|v| !v.is_empty());
        if !has_box && f[2..6].iter().any(|v| !v.is_empty()) {
            return Err(Error::parse_at(line, "box columns must be all set or all empty"));
        }
        let b = if has_box { Some(bbox(line, &f[2..6])?) } else { None };
        let az = if f[6].is_empty() { None } else { Some(finite(line, &f[6], "azimuth")?) };
        let selected = match (fired, az) {
            (true, Some(az)) => Some((b, az)),
            (true, None) => return Err(Error::parse_at(line, "fired frame needs an azimuth")),
            (false, None) if b.is_none() => None,
            (false, _) => return Err(Error::parse_at(line, "selection on a frame that did not fire")),
        };
        out.push(FramePrediction { timestamp, fired, selected, crop: crop(line, &f[7..11])? });
    }
    Ok(out)
}

pub fn encode_decisions(records: &[DecisionRecord]) -> Result<String> {
    let mut w = writer();
    w.write_record(DECISION_HEADER).map_err(csv_err)?;
    for r in records {
        let c = r.crop;
        let rec = [
            r.timestamp.to_string(),
            r.mode.to_string(),
            opt_str(r.target),
            c.x.to_string(),
            c.y.to_string(),
            c.width.to_string(),
            c.height.to_string(),
        ];
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

pub fn parse_decisions(text: &str) -> Result<Vec<DecisionRecord>> {
    let mut out = Vec::new();
    let mut prev = None;
    for (line, f) in rows(text, DECISION_HEADER)? {
        if f.len() != DECISION_HEADER.len() {
            return Err(Error::parse_at(line, format!("expected {} columns", DECISION_HEADER.len())));
        }
        let timestamp = finite(line, &f[0], "timestamp")?;
        check_time(line, timestamp, &mut prev)?;
        let mode: VcMode = f[1].parse().map_err(|_| Error::parse_at(line, format!("unknown mode `{}`", f[1])))?;
        out.push(DecisionRecord { timestamp, mode, target: opt(line, &f[2], "target")?, crop: crop(line, &f[3..7])? });
    }
    Ok(out)
}

/// One row per annotator and frame: the speaker's index into the row's
/// boxes (empty for silence), then four columns per box.
pub fn encode_annotations(annotations: &[Annotation]) -> Result<String> {
    let mut w = writer();
    w.write_record(ANNOTATION_HEADER).map_err(csv_err)?;
    for a in annotations {
        let mut rec = vec![a.annotator.to_string(), a.frame.to_string(), opt_str(a.speaker)];
        for b in &a.boxes {
            rec.extend([b.x, b.y, b.w, b.h].iter().map(|v| v.to_string()));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

pub fn parse_annotations(text: &str) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (line, f) in rows(text, ANNOTATION_HEADER)? {
        if f.len() < 3 || (f.len() - 3) % 4 != 0 {
            return Err(Error::parse_at(line, "expected annotator, frame, speaker and 4 columns per box"));
        }
        let boxes = f[3..].chunks(4).map(|g| bbox(line, g)).collect::<Result<Vec<_>>>()?;
        let speaker: Option<usize> = opt(line, &f[2], "speaker")?;
        if speaker.is_some_and(|s| s >= boxes.len()) {
            return Err(Error::parse_at(line, "speaker index past the last box"));
        }
        out.push(Annotation { annotator: num(line, &f[0], "annotator")?, frame: num(line, &f[1], "frame")?, boxes, speaker });
    }
    Ok(out)
}

/// A labelled feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub frame: usize,
    pub candidate: usize,
    /// Speech gate state of the frame.
    pub gate: bool,
    pub label: i8,
    pub values: Vec<f64>,
}

pub const FEATURE_HEADER_PREFIX: &[&str] = &["frame", "candidate", "gate", "label"];

/// Header names the value columns `f0`, `f1`, …; every row has the same
/// width.
pub fn encode_features(rows: &[FeatureRow]) -> Result<String> {
    let dim = rows.first().map_or(0, |r| r.values.len());
    if rows.iter().any(|r| r.values.len() != dim) {
        return Err(Error::Invalid("feature rows differ in length".into()));
    }
    let mut w = writer();
    let mut header: Vec<String> = FEATURE_HEADER_PREFIX.iter().map(|s| s.to_string()).collect();
    header.extend((0..dim).map(|i| format!("f{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.frame.to_string(), r.candidate.to_string(), u8::from(r.gate).to_string(), r.label.to_string()];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

pub fn parse_features(text: &str) -> Result<Vec<FeatureRow>> {
    let first = text.lines().next().ok_or_else(|| Error::parse("missing header row"))?;
    let dim = first.split(',').count().checked_sub(FEATURE_HEADER_PREFIX.len()).ok_or_else(|| Error::parse_at(1, "short header"))?;
    let names: Vec<String> = (0..dim).map(|i| format!("f{i}")).collect();
    let header: Vec<&str> = FEATURE_HEADER_PREFIX.iter().copied().chain(names.iter().map(String::as_str)).collect();
    let mut out = Vec::new();
    for (line, f) in rows(text, &header)? {
        if f.len() != header.len() {
            return Err(Error::parse_at(line, format!("expected {} columns", header.len())));
        }
        let gate = match f[2].as_str() {
            "1" => true,
            "0" => false,
            v => return Err(Error::parse_at(line, format!("bad gate flag `{v}`"))),
        };
        let label = match f[3].as_str() {
            "1" => 1,
            "-1" => -1,
            v => return Err(Error::parse_at(line, format!("label must be 1 or -1, got `{v}`"))),
        };
        let values = f[4..].iter().map(|v| finite(line, v, "feature")).collect::<Result<Vec<_>>>()?;
        out.push(FeatureRow { frame: num(line, &f[0], "frame")?, candidate: num(line, &f[1], "candidate")?, gate, label, values });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_round_trip() {
        let p = |id, x| ParticipantTruth { id, bbox: BBox::new(x, 10.0, 8.0, 9.5), azimuth_deg: -12.5, depth_m: 2.25 };
        let frames = vec![
            GroundTruthFrame { timestamp: 0.0, participants: vec![p(0, 1.0), p(1, 40.0)], speaker: Some(1) },
            GroundTruthFrame { timestamp: 0.05, participants: vec![p(0, 1.5), p(1, 40.0)], speaker: None },
            GroundTruthFrame { timestamp: 0.1, participants: vec![], speaker: None },
        ];
        assert_eq!(parse_truth(&encode_truth(&frames).unwrap()).unwrap(), frames);
    }

    #[test]
    fn truth_rejects_unknown_speaker_and_ragged_rows() {
        let h = TRUTH_HEADER.join(",");
        assert!(parse_truth(&format!("{h}\n0,3,0,1,1,1,1,0,2\n")).is_err());
        assert!(parse_truth(&format!("{h}\n0,,0,1,1\n")).is_err());
        assert!(parse_truth(&format!("{h}\n1,\n0.5,\n")).is_err());
        assert!(parse_truth("timestamp,speaker\n").is_err());
    }

    #[test]
    fn predictions_round_trip() {
        let c = CropWindow { x: 3, y: 4, width: 64, height: 36 };
        let preds = vec![
            FramePrediction { timestamp: 0.0, fired: false, selected: None, crop: c },
            FramePrediction { timestamp: 0.05, fired: true, selected: Some((Some(BBox::new(1.0, 2.0, 3.0, 4.0)), 7.5)), crop: c },
            FramePrediction { timestamp: 0.1, fired: true, selected: Some((None, -20.0)), crop: c },
        ];
        assert_eq!(parse_predictions(&encode_predictions(&preds).unwrap()).unwrap(), preds);
    }

    #[test]
    fn decisions_round_trip() {
        let recs = vec![
            DecisionRecord { timestamp: 0.0, mode: VcMode::Stationary, target: None, crop: CropWindow::full(320, 180) },
            DecisionRecord { timestamp: 0.05, mode: VcMode::UpdateCut, target: Some(2), crop: CropWindow { x: 10, y: 0, width: 80, height: 45 } },
        ];
        assert_eq!(parse_decisions(&encode_decisions(&recs).unwrap()).unwrap(), recs);
        assert!(parse_decisions(&format!("{}\n0,zoom,,0,0,1,1\n", DECISION_HEADER.join(","))).is_err());
    }

    #[test]
    fn annotations_round_trip() {
        let anns = vec![
            Annotation { annotator: 0, frame: 3, boxes: vec![BBox::new(0.0, 0.0, 10.0, 10.0), BBox::new(20.0, 0.0, 10.0, 10.0)], speaker: Some(1) },
            Annotation { annotator: 1, frame: 3, boxes: vec![], speaker: None },
        ];
        assert_eq!(parse_annotations(&encode_annotations(&anns).unwrap()).unwrap(), anns);
        assert!(parse_annotations(&format!("{}\n0,0,1,0,0,1,1\n", ANNOTATION_HEADER.join(","))).is_err());
    }

    #[test]
    fn features_round_trip() {
        let rows = vec![
            FeatureRow { frame: 0, candidate: 1, gate: true, label: 1, values: vec![0.5, -2.0, 1e-9] },
            FeatureRow { frame: 4, candidate: 0, gate: false, label: -1, values: vec![0.0, 3.25, 7.0] },
        ];
        assert_eq!(parse_features(&encode_features(&rows).unwrap()).unwrap(), rows);
        assert!(parse_features("frame,candidate,gate,label,f0\n0,0,1,2,0.5\n").is_err());
        assert!(parse_features("frame,candidate,gate,label,f1\n").is_err());
    }
}
