//! Depth and intensity rendering of a scenario.
//!
//! Participants are a head ellipse over a torso ellipse, the table is its
//! top plane, and everything else reads as background at maximum range.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{Participant, RoomScenario};
use super::seed_mix;
use crate::error::Result;
use crate::geometry::{BBox, CameraIntrinsics};
use crate::vision::{DepthFrame, VideoFrame, DEPTH_MAX_M};

pub const BACKGROUND_INTENSITY: f64 = 0.25;
const TABLE_INTENSITY: f64 = 0.45;
const TORSO_INTENSITY: f64 = 0.55;
const HEAD_INTENSITY: f64 = 0.8;
const MOUTH_CLOSED_DARKENING: f64 = 0.1;
const MOUTH_FLICKER: f64 = 0.45;
const TORSO_WIDTH_M: f64 = 0.45;
const TORSO_HEIGHT_M: f64 = 0.6;

/// Head centre at time `t`, including idle motion.
pub fn head_position(scenario: &RoomScenario, id: usize, t: f64) -> [f64; 3] {
    let p = &scenario.participant[id];
    let amp = if scenario.is_speaking(id, t) { 2.0 * p.motion } else { p.motion };
    if amp == 0.0 {
        return p.position;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_mix(scenario.seed, 0x4EAD_0000 + id as u64));
    let ph: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
    let tau = std::f64::consts::TAU;
    let dx = ((tau * 0.31 * t + ph[0]).sin() + 0.5 * (tau * 0.73 * t + ph[1]).sin()) / 1.5;
    let dz = ((tau * 0.23 * t + ph[2]).sin() + 0.5 * (tau * 0.61 * t + ph[3]).sin()) / 1.5;
    [p.position[0] + amp * dx, p.position[1], p.position[2] + amp * dz]
}

/// Projected head box of a participant at `t`.
pub fn head_box(scenario: &RoomScenario, cam: &CameraIntrinsics, id: usize, t: f64) -> BBox {
    let p = &scenario.participant[id];
    let [x, y, z] = head_position(scenario, id, t);
    let (u, v) = cam.project(x, y, z).expect("participants stand in front of the camera");
    let s = cam.focal_px / y;
    BBox::from_center(u, v, p.head_width() * s, p.head_size * s)
}

#[derive(Clone, Copy)]
enum Surface {
    Background,
    Table,
    Torso,
    Head { id: usize },
}

struct Ellipse {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    depth: f64,
    surface: Surface,
}

impl Ellipse {
    #[inline]
    fn contains(&self, u: f64, v: f64) -> bool {
        let dx = (u - self.cx) / self.rx;
        let dy = (v - self.cy) / self.ry;
        dx * dx + dy * dy <= 1.0
    }
}

fn participant_ellipses(scenario: &RoomScenario, cam: &CameraIntrinsics, id: usize, t: f64, p: &Participant) -> [Ellipse; 2] {
    let [x, y, z] = head_position(scenario, id, t);
    let s = cam.focal_px / y;
    let (hu, hv) = cam.project(x, y, z).expect("in front");
    let torso_z = z - p.head_size / 2.0 - TORSO_HEIGHT_M / 2.0 + 0.05;
    let (tu, tv) = cam.project(x, y, torso_z).expect("in front");
    [
        Ellipse { cx: hu, cy: hv, rx: p.head_width() * s / 2.0, ry: p.head_size * s / 2.0, depth: y, surface: Surface::Head { id } },
        Ellipse { cx: tu, cy: tv, rx: TORSO_WIDTH_M * s / 2.0, ry: TORSO_HEIGHT_M * s / 2.0, depth: y + 0.05, surface: Surface::Torso },
    ]
}

/// Nearest surface along the ray through `(u, v)`.
struct Scene<'a> {
    scenario: &'a RoomScenario,
    cam: CameraIntrinsics,
    ellipses: Vec<Ellipse>,
}

impl<'a> Scene<'a> {
    fn new(scenario: &'a RoomScenario, cam: CameraIntrinsics, t: f64) -> Self {
        let ellipses = scenario
            .participant
            .iter()
            .enumerate()
            .flat_map(|(id, p)| participant_ellipses(scenario, &cam, id, t, p))
            .collect();
        Self { scenario, cam, ellipses }
    }

    fn table_depth(&self, u: f64, v: f64) -> Option<f64> {
        let table = self.scenario.table?;
        let b = (self.cam.cy - v) / self.cam.focal_px;
        let dz = table.height - self.cam.mount_height_m;
        if b == 0.0 || dz / b <= 0.0 {
            return None;
        }
        let y = dz / b;
        let x = (u - self.cam.cx) / self.cam.focal_px * y;
        (x >= table.x_min && x <= table.x_max && y >= table.y_min && y <= table.y_max).then_some(y)
    }

    /// Indices of ellipses overlapping each pixel row.
    fn row_index(&self, height: usize) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); height];
        for (i, e) in self.ellipses.iter().enumerate() {
            let y0 = (e.cy - e.ry - 1.0).floor().max(0.0) as usize;
            let y1 = ((e.cy + e.ry + 1.0).ceil().max(0.0) as usize).min(height);
            for row in rows.iter_mut().take(y1).skip(y0.min(height)) {
                row.push(i);
            }
        }
        rows
    }

    fn hit(&self, u: f64, v: f64, candidates: &[usize]) -> (f64, Surface) {
        let mut best = (f64::INFINITY, Surface::Background);
        if let Some(d) = self.table_depth(u, v) {
            best = (d, Surface::Table);
        }
        for &i in candidates {
            let e = &self.ellipses[i];
            if e.depth < best.0 && (u - e.cx).abs() <= e.rx && e.contains(u, v) {
                best = (e.depth, e.surface);
            }
        }
        best
    }
}

/// Planar depth at the depth camera's resolution with random holes.
pub fn render_depth_frame(scenario: &RoomScenario, t: f64) -> Result<DepthFrame> {
    scenario.check_time(t)?;
    let cam = scenario.sensors.depth_intrinsics()?;
    let scene = Scene::new(scenario, cam, t);
    let (w, h) = (cam.width, cam.height);
    let mut depths = Vec::with_capacity(w * h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_mix(scenario.seed, 0xDE97_0000 ^ (t * 1e6).round() as u64));
    let holes = scenario.sensors.hole_fraction;
    let rows = scene.row_index(h);
    for (y, row) in rows.iter().enumerate() {
        for x in 0..w {
            let (d, _) = scene.hit(x as f64 + 0.5, y as f64 + 0.5, row);
            let d = d.min(DEPTH_MAX_M);
            let hole = holes > 0.0 && rng.random::<f64>() < holes;
            depths.push(if hole { f64::NAN } else { d });
        }
    }
    DepthFrame::new(w, h, depths, t)
}

/// Intensity proxy with 2×2 supersampling. Speaking participants' mouths
/// flicker from frame to frame.
pub fn render_video_frame(scenario: &RoomScenario, t: f64) -> Result<VideoFrame> {
    scenario.check_time(t)?;
    let cam = scenario.sensors.video_intrinsics()?;
    let scene = Scene::new(scenario, cam, t);
    let (w, h) = (cam.width, cam.height);
    let tick = (t * 1e6).round() as u64;
    let mouth_level: Vec<f64> = scenario
        .participant
        .iter()
        .enumerate()
        .map(|(id, p)| {
            if scenario.is_speaking(id, t) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed_mix(seed_mix(scenario.seed, tick), 0x0B0C_0000 + id as u64));
                HEAD_INTENSITY - MOUTH_FLICKER * p.visual * rng.random::<f64>()
            } else {
                HEAD_INTENSITY - MOUTH_CLOSED_DARKENING
            }
        })
        .collect();
    let boxes: Vec<BBox> = (0..scenario.participant.len()).map(|id| head_box(scenario, &cam, id, t)).collect();

    let mut pixels = vec![BACKGROUND_INTENSITY; w * h];
    const OFFS: [f64; 2] = [0.25, 0.75];
    let rows = scene.row_index(h);
    for (y, row) in rows.iter().enumerate() {
        // Only rows near the table or a participant can differ from background.
        if row.is_empty() && scenario.table.is_none() {
            continue;
        }
        for x in 0..w {
            let mut acc = 0.0;
            for oy in OFFS {
                for ox in OFFS {
                    let (u, v) = (x as f64 + ox, y as f64 + oy);
                    acc += match scene.hit(u, v, row).1 {
                        Surface::Background => BACKGROUND_INTENSITY,
                        Surface::Table => TABLE_INTENSITY,
                        Surface::Torso => TORSO_INTENSITY,
                        Surface::Head { id } => {
                            let b = &boxes[id];
                            let (fx, fy) = ((u - b.x) / b.w, (v - b.y) / b.h);
                            if (0.3..0.7).contains(&fx) && (0.6..0.85).contains(&fy) {
                                mouth_level[id]
                            } else {
                                HEAD_INTENSITY
                            }
                        }
                    };
                }
            }
            pixels[y * w + x] = acc / 4.0;
        }
    }
    Ok(VideoFrame { width: w, height: h, pixels, timestamp: t })
}
