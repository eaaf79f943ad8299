//! Per-candidate feature vectors.
//!
//! Layout (147 values with the default 32-window Haar bank):
//!
//! | range     | content                               | family           |
//! |-----------|---------------------------------------|------------------|
//! | 0..15     | SSL features over the candidate span  | ssl              |
//! | 15..47    | Haar on video intensity               | video-haar       |
//! | 47..79    | Haar on hole-filled depth             | depth-haar       |
//! | 79..111   | Haar on the frame-difference map      | diff             |
//! | 111..143  | Haar on the background-difference map | rdiff            |
//! | 143       | mean frame difference                 | diff             |
//! | 144       | mean background difference            | rdiff            |
//! | 145       | mean hole-filled depth                | normalized-depth |
//! | 146       | detector confidence                   | detector         |

use std::fmt;
use std::str::FromStr;

use crate::audio_ssl::{extract_ssl_features, SslPdf, SSL_FEATURE_COUNT};
use crate::error::{Error, Result};
use crate::geometry::{BBox, CameraIntrinsics, PixelRect};
use crate::vision::{default_bank, DepthFrame, HaarFeature, IntegralImage, VideoFrame};

use super::candidate::CandidateRegion;

pub const HAAR_COUNT: usize = 32;
pub const FEATURE_DIM: usize = SSL_FEATURE_COUNT + 4 * HAAR_COUNT + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureFamily {
    Ssl,
    VideoHaar,
    DepthHaar,
    NormalizedDepth,
    Diff,
    Rdiff,
    Detector,
    /// Any index of a vector that does not follow the pipeline layout.
    Generic,
}

impl FeatureFamily {
    pub const PIPELINE: [FeatureFamily; 7] = [
        FeatureFamily::Ssl,
        FeatureFamily::VideoHaar,
        FeatureFamily::DepthHaar,
        FeatureFamily::NormalizedDepth,
        FeatureFamily::Diff,
        FeatureFamily::Rdiff,
        FeatureFamily::Detector,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureFamily::Ssl => "ssl",
            FeatureFamily::VideoHaar => "video-haar",
            FeatureFamily::DepthHaar => "depth-haar",
            FeatureFamily::NormalizedDepth => "normalized-depth",
            FeatureFamily::Diff => "diff",
            FeatureFamily::Rdiff => "rdiff",
            FeatureFamily::Detector => "detector",
            FeatureFamily::Generic => "generic",
        }
    }

    /// Family of `index` in a vector of `dim` values.
    pub fn of_index(index: usize, dim: usize) -> FeatureFamily {
        if dim != FEATURE_DIM {
            return FeatureFamily::Generic;
        }
        const V: usize = SSL_FEATURE_COUNT;
        match index {
            i if i < V => FeatureFamily::Ssl,
            i if i < V + HAAR_COUNT => FeatureFamily::VideoHaar,
            i if i < V + 2 * HAAR_COUNT => FeatureFamily::DepthHaar,
            i if i < V + 3 * HAAR_COUNT => FeatureFamily::Diff,
            i if i < V + 4 * HAAR_COUNT => FeatureFamily::Rdiff,
            143 => FeatureFamily::Diff,
            144 => FeatureFamily::Rdiff,
            145 => FeatureFamily::NormalizedDepth,
            _ => FeatureFamily::Detector,
        }
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureFamily::PIPELINE
            .iter()
            .chain(std::iter::once(&FeatureFamily::Generic))
            .find(|f| f.as_str() == s)
            .copied()
            .ok_or_else(|| Error::parse(format!("unknown feature family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Integral images shared by every candidate of one frame.
pub struct FrameMaps {
    video: IntegralImage,
    depth: IntegralImage,
    diff: IntegralImage,
    rdiff: IntegralImage,
}

fn abs_diff_ii(a: &VideoFrame, b: Option<&VideoFrame>) -> Result<IntegralImage> {
    match b {
        Some(b) if a.same_dims(b) => {
            let px: Vec<f64> = a.pixels.iter().zip(&b.pixels).map(|(x, y)| (x - y).abs()).collect();
            IntegralImage::new(a.width, a.height, &px)
        }
        Some(_) => Err(Error::DimensionMismatch("motion frames must share dimensions".into())),
        None => IntegralImage::new(a.width, a.height, &vec![0.0; a.pixels.len()]),
    }
}

impl FrameMaps {
    /// `prev` and `background` may be absent on the first frame, in which
    /// case the motion maps are zero.
    pub fn new(
        video: &VideoFrame,
        prev: Option<&VideoFrame>,
        background: Option<&VideoFrame>,
        normalized_depth: &DepthFrame,
    ) -> Result<Self> {
        Ok(Self {
            video: IntegralImage::new(video.width, video.height, &video.pixels)?,
            depth: IntegralImage::new(normalized_depth.width, normalized_depth.height, &normalized_depth.depths)?,
            diff: abs_diff_ii(video, prev)?,
            rdiff: abs_diff_ii(video, background)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    pub bank: Vec<HaarFeature>,
    pub epsilon_rel: f64,
    pub video: CameraIntrinsics,
    pub depth: CameraIntrinsics,
}

/// Head box grown to take in the chin and a margin, at least `min` pixels
/// on each side.
fn grow(b: &BBox, min: f64) -> BBox {
    let (cx, cy) = b.center();
    BBox::from_center(cx, cy + 0.1 * b.h, (1.5 * b.w).max(min), (1.5 * b.h).max(min))
}

fn region(b: &BBox, width: usize, height: usize, min: f64) -> Option<PixelRect> {
    grow(b, min).clip(width as f64, height as f64).to_pixels(width, height)
}

impl FeatureExtractor {
    pub fn new(video: CameraIntrinsics, depth: CameraIntrinsics, epsilon_rel: f64) -> Self {
        Self { bank: default_bank(), epsilon_rel, video, depth }
    }

    pub fn dim(&self) -> usize {
        SSL_FEATURE_COUNT + 4 * self.bank.len() + 4
    }

    /// Feature vector for one candidate. Azimuth-only candidates have
    /// zeros for every image-derived value.
    pub fn extract(&self, maps: &FrameMaps, pdf: &SslPdf, cand: &CandidateRegion) -> Result<FeatureVector> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(extract_ssl_features(pdf, cand.span, self.epsilon_rel)?.as_slice());
        let nb = self.bank.len();
        let video_r = cand.bbox.and_then(|b| region(&b, maps.video.width(), maps.video.height(), 8.0));
        let depth_r = cand.bbox.and_then(|b| {
            let d = self.video.map_box_to(&b, &self.depth);
            region(&d, maps.depth.width(), maps.depth.height(), 4.0)
        });
        let mut haar = |ii: &IntegralImage, r: Option<PixelRect>| -> Result<()> {
            match r {
                Some(r) => v.extend(crate::vision::haar_features(ii, &r, &self.bank)?),
                None => v.extend(std::iter::repeat_n(0.0, nb)),
            }
            Ok(())
        };
        haar(&maps.video, video_r)?;
        haar(&maps.depth, depth_r)?;
        haar(&maps.diff, video_r)?;
        haar(&maps.rdiff, video_r)?;
        let mean = |ii: &IntegralImage, r: Option<PixelRect>| r.map_or(0.0, |r| ii.rect_mean(&r));
        v.push(mean(&maps.diff, video_r));
        v.push(mean(&maps.rdiff, video_r));
        v.push(depth_r.map_or(cand.depth_m, |r| maps.depth.rect_mean(&r)));
        v.push(cand.confidence);
        Ok(FeatureVector(v))
    }
}
