//! The cinematographer's state machine.
//!
//! Each step looks at the selected candidate. The current target keeps the
//! shot (re-centred smoothly if it drifts); a different speaker becomes
//! pending and is cut to once it has held for `t_confirm` and the previous
//! cut is at least `t_min_shot` old. Several speakers can be pending, so a
//! one-frame flicker to a neighbour does not restart the wait; a long stretch without any firing
//! zooms out to the whole frame.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::crop::{crop_size, CropWindow};
use crate::asd::{AsdResult, CandidateRegion};
use crate::error::{Error, Result};
use crate::geometry::{BBox, CameraIntrinsics};
use crate::vision::{zoom_from_depth, TableExtent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VcParams {
    pub t_confirm: f64,
    pub t_min_shot: f64,
    pub t_global: f64,
    pub target_head_fraction: f64,
    pub head_height_m: f64,
    pub aspect: f64,
    pub out_height_px: f64,
    /// Re-centring starts when the target is off-centre by this share of
    /// the crop width and stops below a fifth of it.
    pub drift_fraction: f64,
    pub smoothing_tau: f64,
    pub table_margin_deg: f64,
    /// Same-target tests between frames.
    pub match_iou: f64,
    pub match_azimuth_deg: f64,
    /// Assumed head height when a target has no box.
    pub default_head_z_m: f64,
}

impl Default for VcParams {
    fn default() -> Self {
        Self {
            t_confirm: 0.15,
            t_min_shot: 2.0,
            t_global: 5.0,
            target_head_fraction: 0.3,
            head_height_m: 0.25,
            aspect: 16.0 / 9.0,
            out_height_px: 40.0,
            drift_fraction: 0.1,
            smoothing_tau: 0.3,
            table_margin_deg: 10.0,
            match_iou: 0.3,
            match_azimuth_deg: 3.0,
            default_head_z_m: 1.2,
        }
    }
}

impl VcParams {
    pub fn validate(&self) -> Result<()> {
        let times = [self.t_confirm, self.t_min_shot, self.t_global, self.smoothing_tau];
        if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("VC times must be positive".into()));
        }
        if !(self.target_head_fraction > 0.0 && self.target_head_fraction <= 1.0) {
            return Err(Error::Config("head fraction must lie in (0, 1]".into()));
        }
        let pos = [self.head_height_m, self.aspect, self.out_height_px, self.drift_fraction, self.match_iou];
        if pos.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.match_azimuth_deg < 0.0 || self.table_margin_deg < 0.0 {
            return Err(Error::Config("VC sizes and tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VcMode {
    Stationary,
    UpdateGlobal,
    UpdateCut,
    UpdateWindow,
}

impl VcMode {
    pub fn as_str(self) -> &'static str {
        match self {
            VcMode::Stationary => "stationary",
            VcMode::UpdateGlobal => "global",
            VcMode::UpdateCut => "cut",
            VcMode::UpdateWindow => "window",
        }
    }
}

impl fmt::Display for VcMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VcMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "stationary" => VcMode::Stationary,
            "global" => VcMode::UpdateGlobal,
            "cut" => VcMode::UpdateCut,
            "window" => VcMode::UpdateWindow,
            _ => return Err(Error::parse(format!("unknown VC mode `{s}`"))),
        })
    }
}

/// What the camera is following.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub candidate: usize,
    pub bbox: Option<BBox>,
    pub azimuth_deg: f64,
    pub depth_m: f64,
}

impl Target {
    fn from_candidate(c: &CandidateRegion) -> Self {
        Self { candidate: c.id, bbox: c.bbox, azimuth_deg: c.azimuth_deg(), depth_m: c.depth_m }
    }

    fn same_as(&self, other: &Target, p: &VcParams) -> bool {
        let overlap = matches!((self.bbox, other.bbox), (Some(a), Some(b)) if a.iou(&b) >= p.match_iou);
        overlap || (self.azimuth_deg - other.azimuth_deg).abs() <= p.match_azimuth_deg
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    target: Target,
    since: f64,
    last_seen: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VcState {
    pub mode: VcMode,
    pub target: Option<Target>,
    pub crop: CropWindow,
    pub last_cut: Option<f64>,
    pending: Vec<Pending>,
    last_fired: Option<f64>,
    last_t: Option<f64>,
    /// Sub-pixel crop centre used while re-centring.
    center: (f64, f64),
    recentring: bool,
    frame: (u32, u32),
}

impl VcState {
    pub fn new(frame_w: u32, frame_h: u32) -> Self {
        let crop = CropWindow::full(frame_w, frame_h);
        Self {
            mode: VcMode::Stationary,
            target: None,
            crop,
            last_cut: None,
            pending: Vec::new(),
            last_fired: None,
            last_t: None,
            center: crop.center(),
            recentring: false,
            frame: (frame_w, frame_h),
        }
    }

    pub fn pending_candidate(&self) -> Option<usize> {
        self.pending.iter().max_by(|a, b| a.last_seen.total_cmp(&b.last_seen)).map(|p| p.target.candidate)
    }
}

/// Everything a step sees besides the state.
#[derive(Debug, Clone, Copy)]
pub struct VcInput<'a> {
    pub asd: &'a AsdResult,
    pub candidates: &'a [CandidateRegion],
    pub table: &'a TableExtent,
    pub t: f64,
}

/// Where the crop centre wants to be for `target`.
fn desired_center(target: &Target, size: (u32, u32), cam: &CameraIntrinsics, table: &TableExtent, p: &VcParams) -> (f64, f64) {
    let (cx, head_v) = match target.bbox {
        Some(b) => b.center(),
        None => {
            let v = cam.cy - cam.focal_px * (p.default_head_z_m - cam.mount_height_m) / target.depth_m;
            (cam.column_of_azimuth(target.azimuth_deg), v)
        }
    };
    let cx = match table.azimuth_range() {
        Some((lo, hi)) => {
            let az = cam.azimuth_of_column(cx).clamp(lo - p.table_margin_deg, hi + p.table_margin_deg);
            cam.column_of_azimuth(az)
        }
        None => cx,
    };
    let h = size.1 as f64;
    (cx, head_v - h / 3.0 + h / 2.0)
}

fn target_size(target: &Target, cam: &CameraIntrinsics, frame: (u32, u32), p: &VcParams) -> Result<(u32, u32)> {
    let depth = if target.depth_m > 0.0 { target.depth_m } else { crate::vision::DEPTH_MAX_M };
    let h = zoom_from_depth(depth, cam, p.head_height_m, p.target_head_fraction, p.out_height_px)?;
    Ok(crop_size(h, frame.0, frame.1, p.aspect))
}

/// Advance the machine by one frame.
pub fn vc_step(state: &mut VcState, input: VcInput<'_>, cam: &CameraIntrinsics, p: &VcParams) -> Result<CropWindow> {
    let t = input.t;
    if let Some(prev) = state.last_t {
        if t < prev {
            return Err(Error::TimestampRegression { prev, next: t });
        }
    }
    let dt = state.last_t.map_or(0.0, |prev| t - prev);
    state.last_t = Some(t);
    state.last_fired.get_or_insert(t);
    let (fw, fh) = state.frame;

    let selected = match input.asd.selected {
        Some(id) if input.asd.fired => {
            let c = input
                .candidates
                .iter()
                .find(|c| c.id == id)
                .ok_or_else(|| Error::Invalid(format!("selected candidate {id} not among the candidates")))?;
            Some(Target::from_candidate(c))
        }
        _ => None,
    };
    if selected.is_some() {
        state.last_fired = Some(t);
    }
    state.pending.retain(|pd| t - pd.last_seen <= p.t_confirm + 1e-9);
    state.mode = VcMode::Stationary;

    match selected {
        Some(sel) if state.target.is_some_and(|cur| cur.same_as(&sel, p)) => {
            state.pending.clear();
            state.target = Some(sel);
            let size = (state.crop.width, state.crop.height);
            let want = feasible(desired_center(&sel, size, cam, input.table, p), size, state.frame);
            let off = (want.0 - state.center.0).abs().max((want.1 - state.center.1).abs());
            if off > p.drift_fraction * size.0 as f64 {
                state.recentring = true;
            }
            if state.recentring {
                let k = 1.0 - (-dt / p.smoothing_tau).exp();
                state.center.0 += k * (want.0 - state.center.0);
                state.center.1 += k * (want.1 - state.center.1);
                let next = CropWindow::centered(state.center.0, state.center.1, size.0, size.1, fw, fh);
                if off <= 0.2 * p.drift_fraction * size.0 as f64 {
                    state.recentring = false;
                }
                if next != state.crop {
                    state.mode = VcMode::UpdateWindow;
                    state.crop = next;
                }
            }
        }
        Some(sel) => {
            let since = match state.pending.iter_mut().find(|pd| pd.target.same_as(&sel, p)) {
                Some(pd) => {
                    pd.target = sel;
                    pd.last_seen = t;
                    pd.since
                }
                None => {
                    state.pending.push(Pending { target: sel, since: t, last_seen: t });
                    t
                }
            };
            let confirmed = t - since >= p.t_confirm - 1e-9;
            let shot_ok = state.last_cut.is_none_or(|lc| t - lc >= p.t_min_shot - 1e-9);
            if confirmed && shot_ok {
                let size = target_size(&sel, cam, state.frame, p)?;
                let want = feasible(desired_center(&sel, size, cam, input.table, p), size, state.frame);
                state.crop = CropWindow::centered(want.0, want.1, size.0, size.1, fw, fh);
                state.center = want;
                state.recentring = false;
                state.target = Some(sel);
                state.pending.clear();
                state.last_cut = Some(t);
                state.mode = VcMode::UpdateCut;
            }
        }
        None => {
            let silent_for = t - state.last_fired.unwrap_or(t);
            if silent_for >= p.t_global - 1e-9 && (state.target.is_some() || !state.crop.is_full(fw, fh)) {
                state.crop = CropWindow::full(fw, fh);
                state.center = state.crop.center();
                state.target = None;
                state.recentring = false;
                state.mode = VcMode::UpdateGlobal;
            }
        }
    }
    Ok(state.crop)
}

/// Nearest centre at which a crop of `size` stays inside the frame.
fn feasible(c: (f64, f64), size: (u32, u32), frame: (u32, u32)) -> (f64, f64) {
    let (hw, hh) = (size.0 as f64 / 2.0, size.1 as f64 / 2.0);
    (c.0.clamp(hw, frame.0 as f64 - hw), c.1.clamp(hh, frame.1 as f64 - hh))
}
