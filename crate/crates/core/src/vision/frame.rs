use crate::error::{Error, Result};

pub const DEPTH_MIN_M: f64 = 0.5;
pub const DEPTH_MAX_M: f64 = 10.0;

/// Single-channel intensity proxy for the wide-FOV camera, values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct VideoFrame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
    pub timestamp: f64,
}

impl VideoFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>, timestamp: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyFrame);
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels for a {width}x{height} frame",
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Invalid("video intensities must lie in [0, 1]".into()));
        }
        Ok(Self { width, height, pixels, timestamp })
    }

    pub fn filled(width: usize, height: usize, value: f64, timestamp: f64) -> Self {
        Self { width, height, pixels: vec![value; width * height], timestamp }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn same_dims(&self, other: &VideoFrame) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Planar depth in metres. Holes are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFrame {
    pub width: usize,
    pub height: usize,
    pub depths: Vec<f64>,
    pub timestamp: f64,
    /// Set by normalization when no valid pixel existed to impute from.
    pub fully_imputed: bool,
}

impl DepthFrame {
    pub fn new(width: usize, height: usize, depths: Vec<f64>, timestamp: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyFrame);
        }
        if depths.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} depths for a {width}x{height} frame",
                depths.len()
            )));
        }
        Ok(Self { width, height, depths, timestamp, fully_imputed: false })
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.depths[y * self.width + x]
    }

    pub fn valid_count(&self) -> usize {
        self.depths.iter().filter(|d| is_valid_depth(**d)).count()
    }
}

#[inline]
pub fn is_valid_depth(d: f64) -> bool {
    d.is_finite() && (DEPTH_MIN_M..=DEPTH_MAX_M).contains(&d)
}
