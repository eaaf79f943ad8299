//! Boxes, pixel rectangles and the pinhole camera shared by every stage.
//!
//! World frame: x to the right of the device, y forward along the optical
//! axis, z up from the floor. The camera and the microphone array sit at the
//! origin of the x/y plane; the camera is `mount_height_m` above the floor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in (sub)pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self { x: cx - w / 2.0, y: cy - h / 2.0, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn intersection(&self, other: &BBox) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    /// Fraction of `self`'s area covered by `other`.
    pub fn covered_by(&self, other: &BBox) -> f64 {
        let a = self.area();
        if a <= 0.0 {
            return 0.0;
        }
        self.intersection(other) / a
    }

    pub fn inside(&self, width: f64, height: f64) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.right() <= width && self.bottom() <= height
    }

    pub fn clip(&self, width: f64, height: f64) -> BBox {
        let x0 = self.x.clamp(0.0, width);
        let y0 = self.y.clamp(0.0, height);
        let x1 = self.right().clamp(0.0, width);
        let y1 = self.bottom().clamp(0.0, height);
        BBox::new(x0, y0, x1 - x0, y1 - y0)
    }

    pub fn scaled(&self, factor: f64) -> BBox {
        let (cx, cy) = self.center();
        BBox::from_center(cx, cy, self.w * factor, self.h * factor)
    }

    /// Smallest integer rectangle covering the box, clipped to the image.
    /// `None` if nothing of it remains.
    pub fn to_pixels(&self, width: usize, height: usize) -> Option<PixelRect> {
        let x0 = self.x.floor().max(0.0) as usize;
        let y0 = self.y.floor().max(0.0) as usize;
        let x1 = (self.right().ceil().max(0.0) as usize).min(width);
        let y1 = (self.bottom().ceil().max(0.0) as usize).min(height);
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(PixelRect { x: x0, y: y0, w: x1 - x0, h: y1 - y0 })
    }
}

/// Integer pixel rectangle `[x, x+w) × [y, y+h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl PixelRect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.w > 0 && self.h > 0 && self.x + self.w <= width && self.y + self.h <= height
    }
}

impl std::fmt::Display for PixelRect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}+{}+{}", self.w, self.h, self.x, self.y)
    }
}

/// Pinhole model for the wide-FOV video camera and the depth camera.
///
/// Both sensors share an optical centre, so a ray through one maps to the
/// other by azimuth/elevation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub width: usize,
    pub height: usize,
    pub focal_px: f64,
    pub cx: f64,
    pub cy: f64,
    pub hfov_deg: f64,
    /// Height of the optical centre above the floor.
    pub mount_height_m: f64,
}

impl CameraIntrinsics {
    pub fn from_hfov(width: usize, height: usize, hfov_deg: f64, mount_height_m: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyFrame);
        }
        if !(hfov_deg > 0.0 && hfov_deg < 180.0) {
            return Err(Error::Geometry(format!("hfov {hfov_deg} outside (0, 180)")));
        }
        let half = width as f64 / 2.0;
        Ok(Self {
            width,
            height,
            focal_px: half / (hfov_deg.to_radians() / 2.0).tan(),
            cx: half,
            cy: height as f64 / 2.0,
            hfov_deg,
            mount_height_m,
        })
    }

    pub fn azimuth_of_column(&self, u: f64) -> f64 {
        ((u - self.cx) / self.focal_px).atan().to_degrees()
    }

    pub fn column_of_azimuth(&self, azimuth_deg: f64) -> f64 {
        self.cx + self.focal_px * azimuth_deg.to_radians().tan()
    }

    /// Elevation (degrees above the optical axis) of row `v`.
    pub fn elevation_of_row(&self, v: f64) -> f64 {
        ((self.cy - v) / self.focal_px).atan().to_degrees()
    }

    pub fn row_of_elevation(&self, elevation_deg: f64) -> f64 {
        self.cy - self.focal_px * elevation_deg.to_radians().tan()
    }

    /// Image position of world point `(x, y, z)`; `None` behind the camera.
    pub fn project(&self, x: f64, y: f64, z: f64) -> Option<(f64, f64)> {
        if y <= 0.0 {
            return None;
        }
        Some((
            self.cx + self.focal_px * x / y,
            self.cy - self.focal_px * (z - self.mount_height_m) / y,
        ))
    }

    /// Back-project pixel centre `(u, v)` at planar depth `depth` to world
    /// coordinates.
    pub fn back_project(&self, u: f64, v: f64, depth: f64) -> (f64, f64, f64) {
        let x = (u - self.cx) / self.focal_px * depth;
        let z = self.mount_height_m + (self.cy - v) / self.focal_px * depth;
        (x, depth, z)
    }

    /// Map a box in this camera's pixels onto another camera sharing the
    /// optical centre.
    pub fn map_box_to(&self, b: &BBox, other: &CameraIntrinsics) -> BBox {
        let scale = other.focal_px / self.focal_px;
        BBox::new(
            other.cx + (b.x - self.cx) * scale,
            other.cy + (b.y - self.cy) * scale,
            b.w * scale,
            b.h * scale,
        )
    }

    /// Azimuth interval spanned by a box's columns.
    pub fn azimuth_span(&self, b: &BBox) -> (f64, f64) {
        (self.azimuth_of_column(b.x), self.azimuth_of_column(b.right()))
    }
}
