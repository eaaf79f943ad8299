//! One directory per meeting: the scenario, 4-channel audio, per-frame
//! video and depth images, and ground truth.

use std::path::{Path, PathBuf};

use super::media::{decode_pgm, decode_wav, encode_depth_text, encode_pgm, encode_wav, parse_depth_text};
use super::records::{encode_truth, parse_truth};
use super::{create_dir, read_bytes, read_text, write_atomic};
use crate::audio_ssl::MultichannelAudioFrame;
use crate::error::{Error, Result};
use crate::sim::{ground_truth, render_depth_frame, render_video_frame, synthesize_audio, GroundTruthFrame, RoomScenario};
use crate::vision::{DepthFrame, VideoFrame};

pub const SCENARIO_FILE: &str = "scenario.toml";
pub const AUDIO_FILE: &str = "audio.wav";
pub const TRUTH_FILE: &str = "truth.csv";
pub const FRAMES_DIR: &str = "frames";

fn video_name(i: usize) -> String {
    format!("video_{i:06}.pgm")
}

fn depth_name(i: usize) -> String {
    format!("depth_{i:06}.txt")
}

/// Renders every sensor stream of `scenario` into `dir`.
pub fn write_dataset(scenario: &RoomScenario, dir: &Path) -> Result<()> {
    let frames = dir.join(FRAMES_DIR);
    create_dir(&frames)?;
    let fs = scenario.sensors.sample_rate as usize;
    let total = (scenario.duration * fs as f64).floor() as usize;
    let mut channels: Vec<Vec<f64>> = Vec::new();
    let mut start = 0;
    while start < total {
        let len = fs.min(total - start);
        let chunk = synthesize_audio(scenario, start as f64 / fs as f64, len)?;
        channels.resize(chunk.channel_count(), Vec::new());
        for (c, s) in channels.iter_mut().zip(chunk.channels) {
            c.extend(s);
        }
        start += len;
    }
    let audio = MultichannelAudioFrame::new(channels, scenario.sensors.sample_rate, 0.0)?;
    write_atomic(&dir.join(AUDIO_FILE), &encode_wav(&audio)?)?;

    let mut truth = Vec::with_capacity(scenario.frame_count());
    for i in 0..scenario.frame_count() {
        let t = scenario.frame_time(i);
        write_atomic(&frames.join(video_name(i)), &encode_pgm(&render_video_frame(scenario, t)?)?)?;
        write_atomic(&frames.join(depth_name(i)), encode_depth_text(&render_depth_frame(scenario, t)?).as_bytes())?;
        truth.push(ground_truth(scenario, t)?);
    }
    write_atomic(&dir.join(TRUTH_FILE), encode_truth(&truth)?.as_bytes())?;
    write_atomic(&dir.join(SCENARIO_FILE), scenario.to_canonical().as_bytes())
}

/// A dataset directory opened for reading. Audio and truth are loaded up
/// front; images are read per frame.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dir: PathBuf,
    pub scenario: RoomScenario,
    pub audio: MultichannelAudioFrame,
    pub truth: Vec<GroundTruthFrame>,
}

impl Dataset {
    pub fn open(dir: &Path) -> Result<Self> {
        let scenario = RoomScenario::parse(&read_text(&dir.join(SCENARIO_FILE))?)?;
        let audio = decode_wav(&read_bytes(&dir.join(AUDIO_FILE))?)?;
        if audio.sample_rate != scenario.sensors.sample_rate {
            return Err(Error::Invalid(format!(
                "audio is {} Hz but the scenario says {} Hz",
                audio.sample_rate, scenario.sensors.sample_rate
            )));
        }
        let truth = parse_truth(&read_text(&dir.join(TRUTH_FILE))?)?;
        if truth.len() != scenario.frame_count() {
            return Err(Error::Invalid(format!("{} truth rows for {} frames", truth.len(), scenario.frame_count())));
        }
        Ok(Self { dir: dir.to_path_buf(), scenario, audio, truth })
    }

    pub fn video(&self, i: usize) -> Result<VideoFrame> {
        decode_pgm(&read_bytes(&self.dir.join(FRAMES_DIR).join(video_name(i)))?, self.scenario.frame_time(i))
    }

    pub fn depth(&self, i: usize) -> Result<DepthFrame> {
        parse_depth_text(&read_text(&self.dir.join(FRAMES_DIR).join(depth_name(i)))?, self.scenario.frame_time(i))
    }

    /// `len` samples starting at `t`, zero-padded past the end.
    pub fn audio_at(&self, t: f64, len: usize) -> Result<MultichannelAudioFrame> {
        let start = (t * self.audio.sample_rate as f64).round().max(0.0) as usize;
        let channels = self
            .audio
            .channels
            .iter()
            .map(|c| (start..start + len).map(|i| c.get(i).copied().unwrap_or(0.0)).collect())
            .collect();
        MultichannelAudioFrame::new(channels, self.audio.sample_rate, t)
    }
}
