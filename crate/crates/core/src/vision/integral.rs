use crate::error::{Error, Result};
use crate::geometry::PixelRect;

/// Pixels are summed in fixed point with this many fractional bits, so every
/// rectangle sum is exact regardless of summation order.
pub const FIXED_POINT_BITS: u32 = 20;
const SCALE: f64 = (1u64 << FIXED_POINT_BITS) as f64;

#[inline]
pub fn quantize(v: f64) -> i64 {
    (v * SCALE).round() as i64
}

/// `(width+1) × (height+1)` cumulative-sum table; entry `(x, y)` holds the
/// sum of pixels in `[0, x) × [0, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    table: Vec<i64>,
}

impl IntegralImage {
    pub fn new(width: usize, height: usize, pixels: &[f64]) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyFrame);
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!("{} pixels for {width}x{height}", pixels.len())));
        }
        let stride = width + 1;
        let mut table = vec![0i64; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0i64;
            for x in 0..width {
                let p = pixels[y * width + x];
                row += if p.is_finite() { quantize(p) } else { 0 };
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        Ok(Self { width, height, table })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn entry(&self, x: usize, y: usize) -> i64 {
        self.table[y * (self.width + 1) + x]
    }

    /// Exact fixed-point sum over `r`. `r` must fit the image.
    #[inline]
    pub fn rect_sum_fixed(&self, r: &PixelRect) -> i64 {
        let (x0, y0, x1, y1) = (r.x, r.y, r.x + r.w, r.y + r.h);
        self.entry(x1, y1) - self.entry(x0, y1) - self.entry(x1, y0) + self.entry(x0, y0)
    }

    pub fn rect_sum(&self, r: &PixelRect) -> f64 {
        self.rect_sum_fixed(r) as f64 / SCALE
    }

    pub fn rect_mean(&self, r: &PixelRect) -> f64 {
        if r.area() == 0 {
            return 0.0;
        }
        self.rect_sum(r) / r.area() as f64
    }
}

pub fn integral_image(width: usize, height: usize, pixels: &[f64]) -> Result<IntegralImage> {
    IntegralImage::new(width, height, pixels)
}
