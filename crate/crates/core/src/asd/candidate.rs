use serde::{Deserialize, Serialize};

use crate::audio_ssl::SslPdf;
use crate::geometry::{BBox, CameraIntrinsics};
use crate::vision::{DepthFrame, DEPTH_MAX_M};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSource {
    Detector,
    SslPeak,
}

/// A head box from the detector, in video pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedHead {
    pub bbox: BBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRegion {
    pub id: usize,
    pub bbox: Option<BBox>,
    pub span: (f64, f64),
    pub depth_m: f64,
    pub confidence: f64,
    pub source: CandidateSource,
}

impl CandidateRegion {
    pub fn azimuth_deg(&self) -> f64 {
        (self.span.0 + self.span.1) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CandidateConfig {
    /// Widening applied to each head box's azimuth span.
    pub span_margin_deg: f64,
    /// An SSL peak closer than this to a head span adds no candidate.
    pub peak_separation_deg: f64,
    /// The peak must exceed the PDF mean by this factor to count.
    pub peak_ratio: f64,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        Self { span_margin_deg: 3.0, peak_separation_deg: 8.0, peak_ratio: 1.25 }
    }
}

fn clamp_span(span: (f64, f64), pdf: &SslPdf) -> (f64, f64) {
    let (lo, hi) = (pdf.grid.min_deg, pdf.grid.max_deg);
    (span.0.clamp(lo, hi), span.1.clamp(lo, hi))
}

fn distance_to_span(az: f64, span: (f64, f64)) -> f64 {
    if az < span.0 {
        span.0 - az
    } else if az > span.1 {
        az - span.1
    } else {
        0.0
    }
}

/// One candidate per head box, then one azimuth-only candidate at the
/// global SSL peak when that peak is far from every box. Depth is left at
/// max range; see [`attach_depth`].
pub fn generate_candidates(
    heads: &[DetectedHead],
    pdf: &SslPdf,
    intrinsics: &CameraIntrinsics,
    config: &CandidateConfig,
) -> Vec<CandidateRegion> {
    let mut out: Vec<CandidateRegion> = heads
        .iter()
        .enumerate()
        .map(|(id, h)| {
            let (a, b) = intrinsics.azimuth_span(&h.bbox);
            let span = (a.min(b) - config.span_margin_deg, a.max(b) + config.span_margin_deg);
            CandidateRegion {
                id,
                bbox: Some(h.bbox),
                span: clamp_span(span, pdf),
                depth_m: DEPTH_MAX_M,
                confidence: h.confidence,
                source: CandidateSource::Detector,
            }
        })
        .collect();
    let peak = pdf.argmax_deg();
    let strong = pdf.max() >= config.peak_ratio * pdf.mean();
    if strong && out.iter().all(|c| distance_to_span(peak, c.span) >= config.peak_separation_deg) {
        let step = pdf.grid.step_deg;
        out.push(CandidateRegion {
            id: out.len(),
            bbox: None,
            span: clamp_span((peak - step, peak + step), pdf),
            depth_m: DEPTH_MAX_M,
            confidence: 0.0,
            source: CandidateSource::SslPeak,
        });
    }
    out
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

/// Candidate depth from a hole-filled depth frame: the median over the
/// central half of the head box, or over the column above the horizon for
/// azimuth-only candidates.
pub fn candidate_depth(cand: &CandidateRegion, depth: &DepthFrame, video: &CameraIntrinsics, depth_cam: &CameraIntrinsics) -> f64 {
    let mut vals = Vec::new();
    match cand.bbox {
        Some(b) => {
            let d = video.map_box_to(&b.scaled(0.5), depth_cam);
            if let Some(r) = d.to_pixels(depth.width, depth.height) {
                for y in r.y..r.y + r.h {
                    for x in r.x..r.x + r.w {
                        vals.push(depth.at(x, y));
                    }
                }
            }
        }
        None => {
            let u = depth_cam.column_of_azimuth(cand.azimuth_deg()).floor().max(0.0) as usize;
            let horizon = (depth_cam.cy.ceil() as usize).min(depth.height);
            for x in u.saturating_sub(1)..(u + 2).min(depth.width) {
                for y in 0..horizon {
                    let d = depth.at(x, y);
                    if d < DEPTH_MAX_M {
                        vals.push(d);
                    }
                }
            }
        }
    }
    median(&mut vals).filter(|d| d.is_finite() && *d > 0.0).unwrap_or(DEPTH_MAX_M)
}

pub fn attach_depth(cands: &mut [CandidateRegion], depth: &DepthFrame, video: &CameraIntrinsics, depth_cam: &CameraIntrinsics) {
    for c in cands {
        c.depth_m = candidate_depth(c, depth, video, depth_cam);
    }
}
