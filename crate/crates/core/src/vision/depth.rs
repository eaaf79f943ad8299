//! Hole filling, table-plane estimation and depth-driven zoom.

use super::frame::{is_valid_depth, DepthFrame, DEPTH_MAX_M};
use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;

pub const HOLE_FILL_PASSES: usize = 8;

/// Fill holes with the median of valid 8-neighbours, repeating for up to
/// [`HOLE_FILL_PASSES`] passes; anything still missing becomes max range.
pub fn normalize_depth(frame: &DepthFrame) -> DepthFrame {
    let (w, h) = (frame.width, frame.height);
    let mut out = frame.clone();
    let any_valid = frame.depths.iter().any(|d| is_valid_depth(*d));
    if !any_valid {
        out.depths.iter_mut().for_each(|d| *d = DEPTH_MAX_M);
        out.fully_imputed = true;
        return out;
    }
    let mut valid: Vec<bool> = out.depths.iter().map(|d| is_valid_depth(*d)).collect();
    let mut neigh = Vec::with_capacity(8);
    for _ in 0..HOLE_FILL_PASSES {
        if valid.iter().all(|v| *v) {
            break;
        }
        let snapshot = out.depths.clone();
        let snap_valid = valid.clone();
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if snap_valid[i] {
                    continue;
                }
                neigh.clear();
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let j = ny as usize * w + nx as usize;
                        if snap_valid[j] {
                            neigh.push(snapshot[j]);
                        }
                    }
                }
                if !neigh.is_empty() {
                    out.depths[i] = median(&mut neigh);
                    valid[i] = true;
                }
            }
        }
    }
    for (d, v) in out.depths.iter_mut().zip(&valid) {
        if !*v {
            *d = DEPTH_MAX_M;
        }
    }
    out
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableExtent {
    Absent,
    Present {
        height_m: f64,
        azimuth_deg: (f64, f64),
        depth_m: (f64, f64),
    },
}

impl TableExtent {
    pub fn azimuth_range(&self) -> Option<(f64, f64)> {
        match self {
            TableExtent::Absent => None,
            TableExtent::Present { azimuth_deg, .. } => Some(*azimuth_deg),
        }
    }
}

const HEIGHT_BIN_M: f64 = 0.02;
const HEIGHT_RANGE_M: f64 = 3.0;
/// Adjacent rows on a horizontal surface back-project to the same height.
const FLAT_STEP_M: f64 = 0.01;
const MIN_PLANE_SHARE: f64 = 0.10;

/// Dominant horizontal plane below the ceiling, found as the mode of a
/// height histogram over back-projected pixels.
pub fn estimate_table(frame: &DepthFrame, intrinsics: &CameraIntrinsics) -> Result<TableExtent> {
    let (w, h) = (frame.width, frame.height);
    let total = w * h;
    let valid = frame.valid_count();
    if total == 0 || valid * 2 < total {
        return Err(Error::InsufficientDepth { valid: 100.0 * valid as f64 / total.max(1) as f64 });
    }
    let cam = CameraIntrinsics { width: w, height: h, ..*intrinsics };
    let returns = |d: f64| is_valid_depth(d) && d < DEPTH_MAX_M - 1e-6;
    let height_at = |x: usize, y: usize| cam.back_project(x as f64 + 0.5, y as f64 + 0.5, frame.at(x, y)).2;

    let mut points = 0usize;
    let n_bins = (HEIGHT_RANGE_M / HEIGHT_BIN_M) as usize;
    let mut hist = vec![0usize; n_bins];
    let mut flat: Vec<(usize, usize, f64)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let d = frame.at(x, y);
            if !returns(d) {
                continue;
            }
            points += 1;
            let z = height_at(x, y);
            let on_flat = [y.checked_sub(1), (y + 1 < h).then_some(y + 1)]
                .into_iter()
                .flatten()
                .any(|ny| returns(frame.at(x, ny)) && (height_at(x, ny) - z).abs() <= FLAT_STEP_M);
            if on_flat && (0.0..HEIGHT_RANGE_M).contains(&z) {
                hist[(z / HEIGHT_BIN_M) as usize] += 1;
                flat.push((x, y, z));
            }
        }
    }
    let Some((mode, &count)) = hist.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))) else {
        return Ok(TableExtent::Absent);
    };
    if points == 0 || (count as f64) < MIN_PLANE_SHARE * points as f64 {
        return Ok(TableExtent::Absent);
    }
    let centre = (mode as f64 + 0.5) * HEIGHT_BIN_M;
    let plane: Vec<&(usize, usize, f64)> =
        flat.iter().filter(|p| (p.2 - centre).abs() <= 1.5 * HEIGHT_BIN_M).collect();
    let height_m = plane.iter().map(|p| p.2).sum::<f64>() / plane.len() as f64;
    let mut az = (f64::INFINITY, f64::NEG_INFINITY);
    let mut depth = (f64::INFINITY, f64::NEG_INFINITY);
    for &&(x, y, _) in &plane {
        let a = cam.azimuth_of_column(x as f64 + 0.5);
        let d = frame.at(x, y);
        az = (az.0.min(a), az.1.max(a));
        depth = (depth.0.min(d), depth.1.max(d));
    }
    Ok(TableExtent::Present { height_m, azimuth_deg: az, depth_m: depth })
}

/// Source crop height (pixels) that makes a head at `depth_m` fill
/// `target_head_fraction` of the output, clamped to
/// `[out_height_px, frame height]`.
pub fn zoom_from_depth(
    depth_m: f64,
    intrinsics: &CameraIntrinsics,
    head_height_m: f64,
    target_head_fraction: f64,
    out_height_px: f64,
) -> Result<f64> {
    if !(depth_m > 0.0) {
        return Err(Error::NonPositiveDepth(depth_m));
    }
    if !(target_head_fraction > 0.0 && target_head_fraction <= 1.0) {
        return Err(Error::Invalid(format!("head fraction {target_head_fraction} outside (0, 1]")));
    }
    Ok(unclamped_crop_height(depth_m, intrinsics, head_height_m, target_head_fraction)
        .clamp(out_height_px.min(intrinsics.height as f64), intrinsics.height as f64))
}

pub(crate) fn unclamped_crop_height(depth_m: f64, cam: &CameraIntrinsics, head_m: f64, fraction: f64) -> f64 {
    cam.focal_px * head_m / depth_m / fraction
}
