//! Haar-like rectangle features over an integral image.

use super::integral::IntegralImage;
use crate::error::{Error, Result};
use crate::geometry::PixelRect;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaarKind {
    /// Right half minus left half.
    TwoRectHorizontal,
    /// Bottom half minus top half.
    TwoRectVertical,
    /// Twice the middle third minus the outer thirds.
    ThreeRect,
    /// Main-diagonal quadrants minus anti-diagonal quadrants.
    FourRectChecker,
}

impl HaarKind {
    pub const ALL: [HaarKind; 4] =
        [HaarKind::TwoRectHorizontal, HaarKind::TwoRectVertical, HaarKind::ThreeRect, HaarKind::FourRectChecker];
}

/// A feature window given as fractions `(x, y, w, h)` of the candidate
/// region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarFeature {
    pub kind: HaarKind,
    pub rect: [f64; 4],
}

impl HaarFeature {
    pub fn new(kind: HaarKind, rect: [f64; 4]) -> Result<Self> {
        let [x, y, w, h] = rect;
        if !(x >= 0.0 && y >= 0.0 && w > 0.0 && h > 0.0 && x + w <= 1.0 + 1e-12 && y + h <= 1.0 + 1e-12) {
            return Err(Error::Invalid(format!("haar window {rect:?} outside the unit square")));
        }
        Ok(Self { kind, rect })
    }

    /// Signed fixed-point response over `region`.
    fn response(&self, ii: &IntegralImage, region: &PixelRect) -> i64 {
        let [fx, fy, fw, fh] = self.rect;
        let x = region.x + (fx * region.w as f64).round() as usize;
        let y = region.y + (fy * region.h as f64).round() as usize;
        let w = ((fw * region.w as f64).round() as usize).min(region.x + region.w - x);
        let h = ((fh * region.h as f64).round() as usize).min(region.y + region.h - y);
        let sum = |dx: usize, dy: usize, rw: usize, rh: usize| ii.rect_sum_fixed(&PixelRect::new(x + dx, y + dy, rw, rh));
        match self.kind {
            HaarKind::TwoRectHorizontal => {
                let half = w / 2;
                if half == 0 || h == 0 {
                    return 0;
                }
                sum(half, 0, half, h) - sum(0, 0, half, h)
            }
            HaarKind::TwoRectVertical => {
                let half = h / 2;
                if half == 0 || w == 0 {
                    return 0;
                }
                sum(0, half, w, half) - sum(0, 0, w, half)
            }
            HaarKind::ThreeRect => {
                let third = w / 3;
                if third == 0 || h == 0 {
                    return 0;
                }
                2 * sum(third, 0, third, h) - sum(0, 0, third, h) - sum(2 * third, 0, third, h)
            }
            HaarKind::FourRectChecker => {
                let (hw, hh) = (w / 2, h / 2);
                if hw == 0 || hh == 0 {
                    return 0;
                }
                sum(0, 0, hw, hh) + sum(hw, hh, hw, hh) - sum(hw, 0, hw, hh) - sum(0, hh, hw, hh)
            }
        }
    }
}

/// Eight windows per kind: whole region, the four halves, centre, and the
/// upper/lower centre squares.
pub fn default_bank() -> Vec<HaarFeature> {
    const WINDOWS: [[f64; 4]; 8] = [
        [0.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, 0.5],
        [0.0, 0.5, 1.0, 0.5],
        [0.0, 0.0, 0.5, 1.0],
        [0.5, 0.0, 0.5, 1.0],
        [0.25, 0.25, 0.5, 0.5],
        [0.25, 0.0, 0.5, 0.5],
        [0.25, 0.5, 0.5, 0.5],
    ];
    HaarKind::ALL
        .iter()
        .flat_map(|&kind| WINDOWS.iter().map(move |&rect| HaarFeature { kind, rect }))
        .collect()
}

/// Each value is `(positive sum − negative sum) / region area`.
pub fn haar_features(ii: &IntegralImage, region: &PixelRect, bank: &[HaarFeature]) -> Result<Vec<f64>> {
    if bank.is_empty() {
        return Err(Error::Invalid("empty haar bank".into()));
    }
    if !region.fits(ii.width(), ii.height()) {
        return Err(Error::RegionOutside(region.to_string()));
    }
    let scale = (1u64 << super::integral::FIXED_POINT_BITS) as f64 * region.area() as f64;
    Ok(bank.iter().map(|f| f.response(ii, region) as f64 / scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_cancels() {
        let ii = IntegralImage::new(12, 9, &[0.37; 108]).unwrap();
        let v = haar_features(&ii, &PixelRect::new(1, 1, 10, 7), &default_bank()).unwrap();
        assert_eq!(v.len(), 32);
        assert!(v.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn vertical_step_two_rect() {
        let px: Vec<f64> = (0..16).map(|i| if i % 4 >= 2 { 1.0 } else { 0.0 }).collect();
        let ii = IntegralImage::new(4, 4, &px).unwrap();
        let f = HaarFeature::new(HaarKind::TwoRectHorizontal, [0.0, 0.0, 1.0, 1.0]).unwrap();
        let v = haar_features(&ii, &PixelRect::new(0, 0, 4, 4), &[f]).unwrap();
        assert_eq!(v, vec![0.5]);
    }

    #[test]
    fn region_must_fit() {
        let ii = IntegralImage::new(4, 4, &[0.0; 16]).unwrap();
        assert!(matches!(
            haar_features(&ii, &PixelRect::new(2, 2, 4, 4), &default_bank()),
            Err(Error::RegionOutside(_))
        ));
        assert!(haar_features(&ii, &PixelRect::new(0, 0, 4, 4), &[]).is_err());
    }
}
