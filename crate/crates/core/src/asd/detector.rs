//! Head detectors driven by simulator ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::candidate::DetectedHead;
use crate::geometry::BBox;
use crate::sim::{seed_mix, GroundTruthFrame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DetectorConfig {
    /// Exact boxes, confidence 1.
    Truth,
    /// Boxes jittered by a fraction of their size; some heads are missed.
    Noisy { jitter: f64, miss_rate: f64 },
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig::Noisy { jitter: 0.05, miss_rate: 0.01 }
    }
}

impl DetectorConfig {
    /// Boxes for one frame, kept inside a `width × height` image.
    /// Deterministic in `(seed, truth.timestamp)`.
    pub fn detect(&self, truth: &GroundTruthFrame, width: usize, height: usize, seed: u64) -> Vec<DetectedHead> {
        let (w, h) = (width as f64, height as f64);
        match *self {
            DetectorConfig::Truth => {
                truth.participants.iter().map(|p| DetectedHead { bbox: p.bbox.clip(w, h), confidence: 1.0 }).collect()
            }
            DetectorConfig::Noisy { jitter, miss_rate } => {
                let tick = (truth.timestamp * 1e6).round() as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed_mix(seed_mix(seed, tick), 0xDE7E_C7));
                let mut out = Vec::with_capacity(truth.participants.len());
                for p in &truth.participants {
                    let mut u = || rng.random_range(-1.0..=1.0) * jitter;
                    let b = p.bbox;
                    let (dx, dy, dw, dh) = (u() * b.w, u() * b.h, u() * b.w, u() * b.h);
                    let conf = rng.random_range(0.6..1.0);
                    if rng.random::<f64>() < miss_rate {
                        continue;
                    }
                    let (cx, cy) = b.center();
                    let jb = BBox::from_center(cx + dx, cy + dy, (b.w + dw).max(1.0), (b.h + dh).max(1.0)).clip(w, h);
                    if jb.area() > 0.0 {
                        out.push(DetectedHead { bbox: jb, confidence: conf });
                    }
                }
                out
            }
        }
    }
}
