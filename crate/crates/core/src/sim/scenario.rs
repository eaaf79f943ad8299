//! Declarative meeting description.
//!
//! Scenario files are TOML. Mandatory keys are `duration`, the `[room]`
//! table and the `participant` array (which may be empty). Everything else
//! has a default; [`RoomScenario::to_canonical`] writes every field so that
//! parsing the canonical text gives back the same scenario.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, CameraIntrinsics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoomClass {
    Small,
    Medium,
    Large,
}

impl RoomClass {
    pub const ALL: [RoomClass; 3] = [RoomClass::Small, RoomClass::Medium, RoomClass::Large];

    /// Small fits 6 or fewer people, medium 7–16, large more than 16.
    pub fn for_headcount(n: usize) -> Self {
        match n {
            0..=6 => RoomClass::Small,
            7..=16 => RoomClass::Medium,
            _ => RoomClass::Large,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RoomClass::Small => "small",
            RoomClass::Medium => "medium",
            RoomClass::Large => "large",
        }
    }
}

impl std::str::FromStr for RoomClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(RoomClass::Small),
            "medium" => Ok(RoomClass::Medium),
            "large" => Ok(RoomClass::Large),
            other => Err(Error::parse(format!("unknown room class `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomDims {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sensors {
    pub video_width: usize,
    pub video_height: usize,
    pub depth_width: usize,
    pub depth_height: usize,
    pub hfov_deg: f64,
    pub mount_height: f64,
    pub hole_fraction: f64,
    pub sample_rate: u32,
}

impl Default for Sensors {
    fn default() -> Self {
        Self {
            video_width: 320,
            video_height: 180,
            depth_width: 128,
            depth_height: 106,
            hfov_deg: 100.0,
            mount_height: 1.0,
            hole_fraction: 0.02,
            sample_rate: crate::audio_ssl::DEFAULT_SAMPLE_RATE,
        }
    }
}

impl Sensors {
    pub fn video_intrinsics(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::from_hfov(self.video_width, self.video_height, self.hfov_deg, self.mount_height)
    }

    pub fn depth_intrinsics(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::from_hfov(self.depth_width, self.depth_height, self.hfov_deg, self.mount_height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Noise {
    /// Speech-to-noise ratio per channel; `inf` disables sensor noise.
    pub snr_db: f64,
    /// Mean distractor events per second.
    pub distractor_rate: f64,
    pub distractor_duration: f64,
    /// Distractor amplitude relative to nominal speech.
    pub distractor_level: f64,
}

impl Default for Noise {
    fn default() -> Self {
        Self { snr_db: 30.0, distractor_rate: 0.0, distractor_duration: 0.25, distractor_level: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub height: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

fn default_head_size() -> f64 {
    0.22
}
fn default_motion() -> f64 {
    0.002
}
fn default_visual() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Participant {
    /// Head centre `[x, y, z]` in metres.
    pub position: [f64; 3],
    /// Head height in metres; width is 3/4 of it.
    #[serde(default = "default_head_size")]
    pub head_size: f64,
    /// Idle head-motion amplitude in metres.
    #[serde(default = "default_motion")]
    pub motion: f64,
    /// Strength of the visible mouth movement while speaking.
    #[serde(default = "default_visual")]
    pub visual: f64,
}

impl Participant {
    pub fn azimuth_deg(&self) -> f64 {
        self.position[0].atan2(self.position[1]).to_degrees()
    }

    pub fn head_width(&self) -> f64 {
        0.75 * self.head_size
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeechSegment {
    pub participant: usize,
    pub start: f64,
    pub end: f64,
}

impl SpeechSegment {
    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

fn default_name() -> String {
    "meeting".into()
}
fn default_fps() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomScenario {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<RoomClass>,
    pub duration: f64,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default)]
    pub seed: u64,
    pub room: RoomDims,
    #[serde(default)]
    pub sensors: Sensors,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    pub participant: Vec<Participant>,
    #[serde(default)]
    pub speech: Vec<SpeechSegment>,
}

impl RoomScenario {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s: RoomScenario = toml::from_str(text).map_err(|e| Error::Scenario(e.message().to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("scenario fields are TOML-representable")
    }

    pub fn room_class(&self) -> RoomClass {
        self.class.unwrap_or_else(|| RoomClass::for_headcount(self.participant.len()))
    }

    /// Number of frame ticks, `⌈duration × fps⌉`.
    pub fn frame_count(&self) -> usize {
        (self.duration * self.fps - 1e-9).ceil().max(0.0) as usize
    }

    pub fn frame_time(&self, index: usize) -> f64 {
        index as f64 / self.fps
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.duration + 1e-9) {
            return Err(Error::TimeOutOfRange { t, duration: self.duration });
        }
        Ok(())
    }

    /// Speaking participant at `t`; overlaps go to the latest onset.
    pub fn active_speaker(&self, t: f64) -> Option<usize> {
        self.speech
            .iter()
            .filter(|s| s.contains(t))
            .max_by(|a, b| a.start.total_cmp(&b.start))
            .map(|s| s.participant)
    }

    pub fn is_speaking(&self, participant: usize, t: f64) -> bool {
        self.speech.iter().any(|s| s.participant == participant && s.contains(t))
    }

    fn validate(&mut self) -> Result<()> {
        let err = |m: String| Err(Error::Scenario(m));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return err(format!("duration {} must be positive", self.duration));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return err(format!("fps {} must be positive", self.fps));
        }
        let r = self.room;
        if !(r.width > 0.0 && r.depth > 0.0 && r.height > 0.0) || ![r.width, r.depth, r.height].iter().all(|v| v.is_finite()) {
            return err("room dimensions must be positive".into());
        }
        let s = self.sensors;
        if s.video_width == 0 || s.video_height == 0 || s.depth_width == 0 || s.depth_height == 0 {
            return err("sensor resolutions must be positive".into());
        }
        if s.video_width * s.video_height > 1 << 24 || s.depth_width * s.depth_height > 1 << 24 {
            return err("sensor resolution too large".into());
        }
        if !(s.hfov_deg > 0.0 && s.hfov_deg < 170.0) {
            return err(format!("hfov {} outside (0, 170)", s.hfov_deg));
        }
        if !(0.0..1.0).contains(&s.hole_fraction) {
            return err(format!("hole_fraction {} outside [0, 1)", s.hole_fraction));
        }
        if !(s.mount_height > 0.0 && s.mount_height < r.height) {
            return err("camera mount height must lie inside the room".into());
        }
        if !(1000..=192_000).contains(&s.sample_rate) {
            return err(format!("sample rate {} unsupported", s.sample_rate));
        }
        let n = self.noise;
        if n.snr_db.is_nan() || !(n.distractor_rate >= 0.0 && n.distractor_rate.is_finite())
            || !(n.distractor_duration > 0.0 && n.distractor_duration.is_finite())
            || !(n.distractor_level >= 0.0 && n.distractor_level.is_finite())
        {
            return err("noise parameters out of range".into());
        }
        if let Some(t) = self.table {
            if !(t.height > 0.0 && t.height < r.height && t.x_min < t.x_max && t.y_min < t.y_max && t.y_min > 0.0)
                || ![t.height, t.x_min, t.x_max, t.y_min, t.y_max].iter().all(|v| v.is_finite())
            {
                return err("table extent is malformed".into());
            }
        }
        let cam = s.video_intrinsics()?;
        for (i, p) in self.participant.iter().enumerate() {
            let [x, y, z] = p.position;
            if !(x.abs() <= r.width / 2.0 && y > 0.0 && y <= r.depth && z > 0.0 && z <= r.height) {
                return err(format!("participant {i} at {:?} is outside the room", p.position));
            }
            if !(p.head_size > 0.0 && p.head_size < 1.0 && p.motion >= 0.0 && p.motion < 0.2 && p.visual >= 0.0 && p.visual <= 1.0) {
                return err(format!("participant {i} has out-of-range head/motion/visual values"));
            }
            let margin = p.motion * 3.0;
            let (u, v) = cam.project(x, y, z).expect("y > 0");
            let scale = cam.focal_px / y;
            let b = BBox::from_center(u, v, (p.head_width() + 2.0 * margin) * scale, (p.head_size + 2.0 * margin) * scale);
            if !b.inside(cam.width as f64, cam.height as f64) {
                return err(format!("participant {i} is outside the camera field of view"));
            }
        }
        let mut segs: Vec<&SpeechSegment> = self.speech.iter().collect();
        for s in &segs {
            if s.participant >= self.participant.len() {
                return err(format!("speech segment names unknown participant {}", s.participant));
            }
            if !(s.start >= 0.0 && s.start < s.end && s.end <= self.duration + 1e-9) {
                return err(format!("speech segment [{}, {}) is malformed or outside the meeting", s.start, s.end));
            }
        }
        segs.sort_by(|a, b| a.participant.cmp(&b.participant).then(a.start.total_cmp(&b.start)));
        for w in segs.windows(2) {
            if w[0].participant == w[1].participant && w[1].start < w[0].end {
                return err(format!("overlapping speech segments for participant {}", w[0].participant));
            }
        }
        let derived = RoomClass::for_headcount(self.participant.len());
        match self.class {
            Some(c) if c != derived => {
                return err(format!(
                    "class `{}` does not match {} participants ({})",
                    c.as_str(),
                    self.participant.len(),
                    derived.as_str()
                ))
            }
            _ => self.class = Some(derived),
        }
        Ok(())
    }
}

pub fn parse_scenario(text: &str) -> Result<RoomScenario> {
    RoomScenario::parse(text)
}
