use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asd::{BoostConfig, CandidateConfig, DetectorConfig};
use crate::audio_ssl::{AzimuthGrid, SslConfig, DEFAULT_EPSILON_REL, DEFAULT_FRAME_LEN};
use crate::error::{Error, Result};
use crate::eval::KpiConfig;
use crate::vc::VcParams;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub scenario: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SslSettings {
    /// Samples per analysis window, starting at the frame timestamp.
    pub frame_len: usize,
    pub grid_min_deg: f64,
    pub grid_max_deg: f64,
    pub grid_step_deg: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    /// Mean channel RMS that opens the speech gate.
    pub gate_rms: f64,
    pub epsilon_rel: f64,
    /// Systematic error added to every likelihood, for robustness tests.
    pub bias_deg: f64,
}

impl Default for SslSettings {
    fn default() -> Self {
        let g = AzimuthGrid::default();
        let b = SslConfig::default();
        Self {
            frame_len: DEFAULT_FRAME_LEN,
            grid_min_deg: g.min_deg,
            grid_max_deg: g.max_deg,
            grid_step_deg: g.step_deg,
            band_lo_hz: b.band_lo_hz,
            band_hi_hz: b.band_hi_hz,
            gate_rms: 0.02,
            epsilon_rel: DEFAULT_EPSILON_REL,
            bias_deg: 0.0,
        }
    }
}

impl SslSettings {
    pub fn grid(&self) -> Result<AzimuthGrid> {
        AzimuthGrid::new(self.grid_min_deg, self.grid_max_deg, self.grid_step_deg)
    }

    pub fn band(&self) -> SslConfig {
        SslConfig { band_lo_hz: self.band_lo_hz, band_hi_hz: self.band_hi_hz }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSettings {
    /// Every n-th frame tick contributes training samples.
    pub stride: usize,
    /// Every n-th meeting is held out to calibrate the firing threshold.
    pub validation_every: usize,
    pub max_fnr: f64,
}

impl Default for TrainingSettings {
    fn default() -> Self {
        Self { stride: 4, validation_every: 5, max_fnr: 0.02 }
    }
}

/// Stage whose output can be replaced by ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Ssl,
    Asd,
    Detector,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Ssl, Component::Asd, Component::Detector];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::Ssl => "ssl",
            Component::Asd => "asd",
            Component::Detector => "detector",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Component::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown component `{s}` (expected ssl, asd or detector)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// 1 runs the stages inline; anything larger runs one thread per stage.
    pub threads: usize,
    /// Stage fed with ground truth instead of its own estimate.
    pub oracle: Option<Component>,
    pub paths: Paths,
    pub ssl: SslSettings,
    pub detector: DetectorConfig,
    pub candidate: CandidateConfig,
    pub boost: BoostConfig,
    pub training: TrainingSettings,
    pub vc: VcParams,
    pub kpi: KpiConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: super::STAGE_COUNT,
            oracle: None,
            paths: Paths::default(),
            ssl: SslSettings::default(),
            detector: DetectorConfig::default(),
            candidate: CandidateConfig::default(),
            boost: BoostConfig::default(),
            training: TrainingSettings::default(),
            vc: VcParams::default(),
            kpi: KpiConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are TOML-representable")
    }

    pub fn validate(&self) -> Result<()> {
        self.ssl.grid().map_err(|e| Error::Config(e.to_string()))?;
        let s = &self.ssl;
        if s.frame_len == 0 || !(s.band_lo_hz < s.band_hi_hz) || !(s.gate_rms >= 0.0) || !(s.epsilon_rel > 0.0) || !s.bias_deg.is_finite() {
            return Err(Error::Config("bad SSL settings".into()));
        }
        if self.training.stride == 0 || self.training.validation_every == 0 || !(0.0..=1.0).contains(&self.training.max_fnr) {
            return Err(Error::Config("bad training settings".into()));
        }
        if self.boost.rounds == 0 || !(self.boost.alpha_max > 0.0) {
            return Err(Error::Config("boosting needs at least one round and a positive alpha cap".into()));
        }
        if let DetectorConfig::Noisy { jitter, miss_rate } = self.detector {
            if !(jitter >= 0.0 && jitter < 1.0) || !(0.0..=1.0).contains(&miss_rate) {
                return Err(Error::Config("detector jitter must lie in [0, 1) and miss rate in [0, 1]".into()));
            }
        }
        let k = &self.kpi;
        if !(k.iou_thresh > 0.0 && k.iou_thresh <= 1.0) || !(k.containment > 0.0 && k.containment <= 1.0) || !(k.azimuth_tol_deg >= 0.0) {
            return Err(Error::Config("bad KPI settings".into()));
        }
        self.vc.validate()
    }
}
