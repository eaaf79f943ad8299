use super::frame::VideoFrame;
use crate::error::{Error, Result};
use crate::geometry::PixelRect;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionFeatures {
    /// Mean |current − previous| over the region.
    pub diff: f64,
    /// Mean |current − background| over the region.
    pub rdiff: f64,
}

pub fn motion_features(
    curr: &VideoFrame,
    prev: &VideoFrame,
    background: &VideoFrame,
    region: &PixelRect,
) -> Result<MotionFeatures> {
    if !curr.same_dims(prev) || !curr.same_dims(background) {
        return Err(Error::DimensionMismatch("motion frames must share dimensions".into()));
    }
    if !region.fits(curr.width, curr.height) {
        return Err(Error::RegionOutside(region.to_string()));
    }
    let mut diff = 0.0;
    let mut rdiff = 0.0;
    for y in region.y..region.y + region.h {
        for x in region.x..region.x + region.w {
            let c = curr.at(x, y);
            diff += (c - prev.at(x, y)).abs();
            rdiff += (c - background.at(x, y)).abs();
        }
    }
    let n = region.area() as f64;
    Ok(MotionFeatures { diff: diff / n, rdiff: rdiff / n })
}

/// Per-pixel |a − b|.
pub fn abs_diff_map(a: &VideoFrame, b: &VideoFrame) -> Result<VideoFrame> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch("difference map inputs differ in size".into()));
    }
    let pixels = a.pixels.iter().zip(&b.pixels).map(|(x, y)| (x - y).abs()).collect();
    Ok(VideoFrame { width: a.width, height: a.height, pixels, timestamp: a.timestamp })
}

/// Long-range reference for `Rdiff`: an exponential moving average seeded
/// with the first frame.
#[derive(Debug, Clone)]
pub struct BackgroundModel {
    weight: f64,
    frame: Option<VideoFrame>,
}

/// Per-frame EMA weight at the 5 FPS reference rate.
pub const BACKGROUND_WEIGHT_5FPS: f64 = 0.02;

impl BackgroundModel {
    /// Weight rescaled so the time constant matches 0.02 per frame at 5 FPS.
    pub fn for_fps(fps: f64) -> Self {
        let weight = 1.0 - (1.0 - BACKGROUND_WEIGHT_5FPS).powf(5.0 / fps);
        Self { weight, frame: None }
    }

    pub fn with_weight(weight: f64) -> Self {
        Self { weight, frame: None }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn background(&self) -> Option<&VideoFrame> {
        self.frame.as_ref()
    }

    pub fn update(&mut self, frame: &VideoFrame) -> Result<()> {
        match &mut self.frame {
            None => self.frame = Some(frame.clone()),
            Some(bg) => {
                if !bg.same_dims(frame) {
                    return Err(Error::DimensionMismatch("background model frame size changed".into()));
                }
                let w = self.weight;
                bg.pixels.iter_mut().zip(&frame.pixels).for_each(|(b, p)| *b += w * (p - *b));
                bg.timestamp = frame.timestamp;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_frames_have_no_motion() {
        let f = VideoFrame::filled(10, 10, 0.4, 0.0);
        let m = motion_features(&f, &f, &f, &PixelRect::new(0, 0, 10, 10)).unwrap();
        assert_eq!(m, MotionFeatures { diff: 0.0, rdiff: 0.0 });
    }

    #[test]
    fn one_changed_pixel_in_a_hundred() {
        let prev = VideoFrame::filled(10, 10, 0.4, 0.0);
        let mut curr = prev.clone();
        curr.pixels[55] = 0.5;
        let m = motion_features(&curr, &prev, &prev, &PixelRect::new(0, 0, 10, 10)).unwrap();
        assert!((m.diff - 0.001).abs() < 1e-12);
        assert!((m.rdiff - 0.001).abs() < 1e-12);
    }

    #[test]
    fn background_equal_to_current() {
        let prev = VideoFrame::filled(4, 4, 0.1, 0.0);
        let curr = VideoFrame::filled(4, 4, 0.6, 0.2);
        let m = motion_features(&curr, &prev, &curr, &PixelRect::new(0, 0, 4, 4)).unwrap();
        assert_eq!(m.rdiff, 0.0);
        assert!(m.diff > 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = VideoFrame::filled(4, 4, 0.1, 0.0);
        let b = VideoFrame::filled(5, 4, 0.1, 0.0);
        assert!(motion_features(&a, &b, &a, &PixelRect::new(0, 0, 2, 2)).is_err());
    }

    #[test]
    fn background_converges() {
        let mut bg = BackgroundModel::for_fps(5.0);
        assert!((bg.weight() - 0.02).abs() < 1e-12);
        bg.update(&VideoFrame::filled(2, 2, 0.0, 0.0)).unwrap();
        for _ in 0..1000 {
            bg.update(&VideoFrame::filled(2, 2, 1.0, 0.0)).unwrap();
        }
        assert!(bg.background().unwrap().pixels[0] > 0.99);
        let faster = BackgroundModel::for_fps(20.0);
        assert!(((1.0 - faster.weight()).powi(4) - 0.98).abs() < 1e-12);
    }
}
