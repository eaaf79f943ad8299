use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;
pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;
/// 32 ms at 16 kHz.
pub const DEFAULT_FRAME_LEN: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Directivity {
    Omni,
    Cardioid,
}

impl Directivity {
    /// Amplitude gain for a source at `azimuth_deg` off the forward axis.
    pub fn gain(self, azimuth_deg: f64) -> f64 {
        match self {
            Directivity::Omni => 1.0,
            Directivity::Cardioid => 0.5 * (1.0 + azimuth_deg.to_radians().cos()),
        }
    }
}

/// Linear microphone array.
///
/// `positions` are offsets in metres along the array axis. The axis points
/// towards negative azimuth, so a far-field source at azimuth θ reaches
/// microphone `i` with delay `positions[i]·sin(θ)/c` relative to offset 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MicArrayGeometry {
    positions: Vec<f64>,
    directivity: Vec<Directivity>,
    speed_of_sound: f64,
}

impl MicArrayGeometry {
    pub fn new(positions: Vec<f64>, directivity: Vec<Directivity>, speed_of_sound: f64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::Geometry("need at least two microphones".into()));
        }
        if directivity.len() != positions.len() {
            return Err(Error::Geometry(format!(
                "{} directivity entries for {} microphones",
                directivity.len(),
                positions.len()
            )));
        }
        if positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Geometry("microphone positions must be strictly increasing".into()));
        }
        if !(speed_of_sound > 0.0) {
            return Err(Error::Geometry(format!("speed of sound {speed_of_sound} must be positive")));
        }
        Ok(Self { positions, directivity, speed_of_sound })
    }

    /// Four cardioid microphones over 215 mm with adjacent gaps doubling:
    /// offsets {0, 30.71, 92.14, 215} mm.
    pub fn log_spaced_4() -> Self {
        let unit = 0.215 / 7.0;
        let positions = vec![0.0, unit, 3.0 * unit, 0.215];
        Self::new(positions, vec![Directivity::Cardioid; 4], DEFAULT_SPEED_OF_SOUND)
            .expect("built-in geometry is valid")
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn directivity(&self) -> &[Directivity] {
        &self.directivity
    }

    pub fn speed_of_sound(&self) -> f64 {
        self.speed_of_sound
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn aperture(&self) -> f64 {
        self.positions[self.positions.len() - 1] - self.positions[0]
    }

    /// Far-field arrival delay (seconds) at microphone `mic`.
    pub fn delay(&self, mic: usize, azimuth_deg: f64) -> f64 {
        self.positions[mic] * azimuth_deg.to_radians().sin() / self.speed_of_sound
    }

    /// Largest possible inter-microphone delay, rounded up to whole samples.
    pub fn max_delay_samples(&self, sample_rate: u32) -> usize {
        (self.aperture() / self.speed_of_sound * sample_rate as f64).ceil() as usize
    }
}

impl Default for MicArrayGeometry {
    fn default() -> Self {
        Self::log_spaced_4()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelAudioFrame {
    pub channels: Vec<Vec<f64>>,
    pub sample_rate: u32,
    pub timestamp: f64,
}

impl MultichannelAudioFrame {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32, timestamp: f64) -> Result<Self> {
        if let Some(first) = channels.first() {
            if channels.iter().any(|c| c.len() != first.len()) {
                return Err(Error::Invalid("audio channels differ in length".into()));
            }
        }
        if sample_rate == 0 {
            return Err(Error::Invalid("sample rate must be positive".into()));
        }
        Ok(Self { channels, sample_rate, timestamp })
    }

    pub fn silent(n_channels: usize, len: usize, sample_rate: u32, timestamp: f64) -> Self {
        Self { channels: vec![vec![0.0; len]; n_channels], sample_rate, timestamp }
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn rms(&self, channel: usize) -> f64 {
        let c = &self.channels[channel];
        if c.is_empty() {
            return 0.0;
        }
        (c.iter().map(|s| s * s).sum::<f64>() / c.len() as f64).sqrt()
    }
}
