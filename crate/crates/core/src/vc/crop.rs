use std::fmt;

use crate::geometry::BBox;

/// Integer crop over the wide frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CropWindow {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl CropWindow {
    pub fn full(frame_w: u32, frame_h: u32) -> Self {
        Self { x: 0, y: 0, width: frame_w, height: frame_h }
    }

    pub fn is_full(&self, frame_w: u32, frame_h: u32) -> bool {
        *self == Self::full(frame_w, frame_h)
    }

    pub fn inside(&self, frame_w: u32, frame_h: u32) -> bool {
        self.width > 0 && self.height > 0 && self.x + self.width <= frame_w && self.y + self.height <= frame_h
    }

    pub fn as_bbox(&self) -> BBox {
        BBox::new(self.x as f64, self.y as f64, self.width as f64, self.height as f64)
    }

    /// Share of `b`'s area inside the crop.
    pub fn coverage(&self, b: &BBox) -> f64 {
        b.covered_by(&self.as_bbox())
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x as f64 + self.width as f64 / 2.0, self.y as f64 + self.height as f64 / 2.0)
    }

    /// Crop of the given size centred as close to `(cx, cy)` as the frame
    /// allows.
    pub fn centered(cx: f64, cy: f64, width: u32, height: u32, frame_w: u32, frame_h: u32) -> Self {
        let (width, height) = (width.clamp(1, frame_w), height.clamp(1, frame_h));
        let x = (cx - width as f64 / 2.0).round().clamp(0.0, (frame_w - width) as f64) as u32;
        let y = (cy - height as f64 / 2.0).round().clamp(0.0, (frame_h - height) as f64) as u32;
        Self { x, y, width, height }
    }
}

impl fmt::Display for CropWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}+{}+{}", self.width, self.height, self.x, self.y)
    }
}

/// Crop size for a source height: `(round(h·aspect), round(h))`, or the
/// whole frame when that does not fit.
pub fn crop_size(crop_height_px: f64, frame_w: u32, frame_h: u32, aspect: f64) -> (u32, u32) {
    let h = crop_height_px.round().max(1.0);
    let w = (h * aspect).round();
    if h >= frame_h as f64 || w > frame_w as f64 {
        return (frame_w, frame_h);
    }
    (w as u32, h as u32)
}

/// Frames a head box: centred horizontally, head centre one third of the
/// way down, shifted back inside the frame when needed.
pub fn crop_for_target(head: &BBox, crop_height_px: f64, frame_w: u32, frame_h: u32, aspect: f64) -> CropWindow {
    let (w, h) = crop_size(crop_height_px, frame_w, frame_h, aspect);
    let (cx, cy) = head.center();
    CropWindow::centered(cx, cy - h as f64 / 3.0 + h as f64 / 2.0, w, h, frame_w, frame_h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_height_is_full_frame() {
        let c = crop_for_target(&BBox::from_center(160.0, 90.0, 10.0, 12.0), 180.0, 320, 180, 16.0 / 9.0);
        assert!(c.is_full(320, 180));
    }

    #[test]
    fn left_edge_clamps_position_not_size() {
        let c = crop_for_target(&BBox::new(0.0, 60.0, 10.0, 12.0), 90.0, 320, 180, 16.0 / 9.0);
        assert_eq!((c.x, c.width, c.height), (0, 160, 90));
    }

    #[test]
    fn head_sits_a_third_down() {
        let c = crop_for_target(&BBox::from_center(160.0, 90.0, 10.0, 12.0), 90.0, 320, 180, 16.0 / 9.0);
        assert_eq!(c.y, 60);
        assert_eq!(c.x, 80);
    }
}
