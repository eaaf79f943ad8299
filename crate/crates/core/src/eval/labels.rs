//! Annotation consensus and keyframe interpolation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// One annotator's labels for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub annotator: usize,
    pub frame: usize,
    pub boxes: Vec<BBox>,
    /// Index into `boxes` of the claimed speaker, `None` for silence.
    pub speaker: Option<usize>,
}

impl Annotation {
    fn speaker_box(&self) -> Option<BBox> {
        self.speaker.and_then(|i| self.boxes.get(i).copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Consensus {
    pub boxes: Vec<BBox>,
    /// Index into `boxes` of the agreed speaker.
    pub speaker: Option<usize>,
    pub speaker_agreed: bool,
    /// Some box lacks a second annotator, or nobody agrees on the speaker.
    pub needs_more: bool,
}

fn mean_box(a: &BBox, b: &BBox) -> BBox {
    BBox::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0, (a.w + b.w) / 2.0, (a.h + b.h) / 2.0)
}

/// Boxes two annotators agree on (IoU ≥ `iou_agree`), averaged from the
/// first agreeing pair in annotator order.
pub fn aggregate_labels(annotations: &[Annotation], iou_agree: f64) -> Consensus {
    let mut boxes: Vec<BBox> = Vec::new();
    let mut needs_more = false;
    for (i, a) in annotations.iter().enumerate() {
        for b in &a.boxes {
            let partner = annotations
                .iter()
                .enumerate()
                .filter(|(j, o)| *j != i && o.annotator != a.annotator)
                .find_map(|(j, o)| o.boxes.iter().find(|c| b.iou(c) >= iou_agree).map(|c| (j, *c)));
            let Some((j, c)) = partner else {
                needs_more = true;
                continue;
            };
            if j > i && !boxes.iter().any(|k| k.iou(b) >= iou_agree) {
                boxes.push(mean_box(b, &c));
            }
        }
    }

    let mut speaker = None;
    let mut speaker_agreed = false;
    'pairs: for (i, a) in annotations.iter().enumerate() {
        for o in annotations.iter().skip(i + 1).filter(|o| o.annotator != a.annotator) {
            let agreed = match (a.speaker_box(), o.speaker_box()) {
                (None, None) => Some(None),
                (Some(x), Some(y)) if x.iou(&y) >= iou_agree => Some(Some(mean_box(&x, &y))),
                _ => None,
            };
            if let Some(s) = agreed {
                speaker_agreed = true;
                speaker = s.and_then(|sb| {
                    boxes
                        .iter()
                        .enumerate()
                        .map(|(k, b)| (k, b.iou(&sb)))
                        .filter(|(_, v)| *v > 0.0)
                        .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)))
                        .map(|(k, _)| k)
                });
                break 'pairs;
            }
        }
    }
    Consensus { boxes, speaker, speaker_agreed, needs_more: needs_more || !speaker_agreed }
}

/// Labelled boxes per participant on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Keyframe {
    pub frame: usize,
    pub boxes: BTreeMap<usize, BBox>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLabel {
    pub frame: usize,
    pub boxes: BTreeMap<usize, BBox>,
    /// Agreement of forward and backward tracks per participant.
    pub confidence: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interpolation {
    pub labels: Vec<DenseLabel>,
    /// Frames to send back for labelling.
    pub queue: Vec<usize>,
}

fn velocity(a: &BBox, b: &BBox, frames: f64) -> [f64; 4] {
    [(b.x - a.x) / frames, (b.y - a.y) / frames, (b.w - a.w) / frames, (b.h - a.h) / frames]
}

fn advance(b: &BBox, v: &[f64; 4], k: f64) -> BBox {
    BBox::new(b.x + v[0] * k, b.y + v[1] * k, b.w + v[2] * k, b.h + v[3] * k)
}

/// Linear interpolation between keyframes. A forward track extrapolates
/// each keyframe with the motion that led into it and a backward track
/// extrapolates the next keyframe with the motion leaving it; their IoU is
/// the confidence, and frames below `threshold` are queued.
pub fn interpolate_labels(keyframes: &[Keyframe], threshold: f64) -> Result<Interpolation> {
    if keyframes.len() < 2 {
        return Err(Error::Invalid("need at least two keyframes".into()));
    }
    if keyframes.windows(2).any(|w| w[1].frame <= w[0].frame) {
        return Err(Error::Invalid("keyframes must be strictly increasing".into()));
    }
    let ids: Vec<usize> = keyframes[0].boxes.keys().copied().collect();
    if keyframes.iter().any(|k| !k.boxes.keys().copied().eq(ids.iter().copied())) {
        return Err(Error::Invalid("keyframes label different participant sets".into()));
    }
    let n = keyframes.len();
    let mut labels = Vec::new();
    let mut queue = Vec::new();
    for s in 0..n - 1 {
        let (ka, kb) = (&keyframes[s], &keyframes[s + 1]);
        let span = (kb.frame - ka.frame) as f64;
        let last = s == n - 2;
        for f in ka.frame..kb.frame + usize::from(last) {
            let k = (f - ka.frame) as f64;
            let mut boxes = BTreeMap::new();
            let mut confidence = BTreeMap::new();
            for id in &ids {
                let (a, b) = (ka.boxes[id], kb.boxes[id]);
                let v = velocity(&a, &b, span);
                boxes.insert(*id, advance(&a, &v, k));
                let c = if f == ka.frame || f == kb.frame {
                    1.0
                } else {
                    let vf = if s == 0 { v } else {
                        let p = &keyframes[s - 1];
                        velocity(&p.boxes[id], &a, (ka.frame - p.frame) as f64)
                    };
                    let vb = if last { v } else {
                        let q = &keyframes[s + 2];
                        velocity(&b, &q.boxes[id], (q.frame - kb.frame) as f64)
                    };
                    let fwd = advance(&a, &vf, k);
                    let bwd = advance(&b, &vb, k - span);
                    fwd.iou(&bwd)
                };
                confidence.insert(*id, c);
            }
            if confidence.values().any(|c| *c < threshold) {
                queue.push(f);
            }
            labels.push(DenseLabel { frame: f, boxes, confidence });
        }
    }
    Ok(Interpolation { labels, queue })
}
