//! Far-field multichannel audio for a scenario.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;

use super::scenario::RoomScenario;
use super::seed_mix;
use crate::audio_ssl::{MicArrayGeometry, MultichannelAudioFrame};
use crate::error::{Error, Result};

/// RMS of one talker before directivity and envelope.
pub const SPEECH_RMS: f64 = 0.1;
const SPEECH_TONES: usize = 64;
const SYLLABLE_HZ: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistractorEvent {
    pub start: f64,
    pub end: f64,
    pub azimuth_deg: f64,
    pub seed: u64,
}

/// Distractor bursts for the whole meeting, drawn as a Poisson process.
pub fn distractor_events(scenario: &RoomScenario) -> Vec<DistractorEvent> {
    let n = scenario.noise;
    if n.distractor_rate <= 0.0 || n.distractor_level <= 0.0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_mix(scenario.seed, 0xD15_7AC7));
    let half_fov = scenario.sensors.hfov_deg / 2.0;
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        t += -u.ln() / n.distractor_rate;
        if t >= scenario.duration {
            break;
        }
        events.push(DistractorEvent {
            start: t,
            end: (t + n.distractor_duration).min(scenario.duration),
            azimuth_deg: rng.random_range(-half_fov..half_fov),
            seed: rng.random(),
        });
    }
    events
}

struct ToneSource {
    tones: Vec<(f64, f64)>,
    amplitude: f64,
}

impl ToneSource {
    fn new(seed: u64, band: (f64, f64), count: usize, rms: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tones = (0..count)
            .map(|_| (rng.random_range(band.0..band.1), rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        Self { tones, amplitude: rms / (count as f64 / 2.0).sqrt() }
    }

    /// Adds `gain · env(t) · s(t − delay)` to `out` for samples whose
    /// source time lies in `[on, off)`.
    #[allow(clippy::too_many_arguments)]
    fn render(&self, out: &mut [f64], t0: f64, fs: f64, delay: f64, gain: f64, on: f64, off: f64, env: &dyn Fn(f64) -> f64) {
        let n = out.len();
        let mut sum = vec![0.0; n];
        for &(f, phase) in &self.tones {
            let w = std::f64::consts::TAU * f;
            let mut z = Complex64::from_polar(1.0, w * (t0 - delay) + phase);
            let step = Complex64::from_polar(1.0, w / fs);
            for s in sum.iter_mut() {
                *s += z.im;
                z *= step;
            }
        }
        for (k, (o, s)) in out.iter_mut().zip(sum).enumerate() {
            let ts = t0 + k as f64 / fs - delay;
            if ts >= on && ts < off {
                *o += gain * self.amplitude * env(ts) * s;
            }
        }
    }
}

/// Microphone signals for `[t, t + frame_len / fs)`.
pub fn synthesize_audio(scenario: &RoomScenario, t: f64, frame_len: usize) -> Result<MultichannelAudioFrame> {
    synthesize_audio_with(scenario, &MicArrayGeometry::default(), t, frame_len)
}

pub fn synthesize_audio_with(
    scenario: &RoomScenario,
    array: &MicArrayGeometry,
    t: f64,
    frame_len: usize,
) -> Result<MultichannelAudioFrame> {
    let fs = scenario.sensors.sample_rate as f64;
    let end = t + frame_len as f64 / fs;
    if !(t >= 0.0) || end > scenario.duration + 1e-9 {
        return Err(Error::TimeOutOfRange { t, duration: scenario.duration });
    }
    let mut channels = vec![vec![0.0; frame_len]; array.len()];
    let margin = array.aperture() / array.speed_of_sound();

    for (si, seg) in scenario.speech.iter().enumerate() {
        if seg.end + margin < t || seg.start - margin > end {
            continue;
        }
        let p = &scenario.participant[seg.participant];
        let az = p.azimuth_deg();
        let src = ToneSource::new(seed_mix(scenario.seed, 0x5EEC_0000 + si as u64), (300.0, 3400.0), SPEECH_TONES, SPEECH_RMS);
        let phase = seed_mix(scenario.seed, seg.participant as u64) as f64 / u64::MAX as f64 * std::f64::consts::TAU;
        let env = move |ts: f64| 0.65 + 0.35 * (std::f64::consts::TAU * SYLLABLE_HZ * ts + phase).sin();
        for (m, ch) in channels.iter_mut().enumerate() {
            let gain = array.directivity()[m].gain(az);
            src.render(ch, t, fs, array.delay(m, az), gain, seg.start, seg.end, &env);
        }
    }

    for ev in distractor_events(scenario) {
        if ev.end + margin < t || ev.start - margin > end {
            continue;
        }
        let src = ToneSource::new(ev.seed, (200.0, 6000.0), SPEECH_TONES, SPEECH_RMS * scenario.noise.distractor_level);
        for (m, ch) in channels.iter_mut().enumerate() {
            let gain = array.directivity()[m].gain(ev.azimuth_deg);
            src.render(ch, t, fs, array.delay(m, ev.azimuth_deg), gain, ev.start, ev.end, &|_| 1.0);
        }
    }

    let snr = scenario.noise.snr_db;
    if snr.is_finite() {
        let sigma = SPEECH_RMS * 10f64.powf(-snr / 20.0);
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::Invalid(e.to_string()))?;
        let first_sample = (t * fs).round() as u64;
        for (m, ch) in channels.iter_mut().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_mix(seed_mix(scenario.seed, first_sample), 0xA0D1_0000 + m as u64));
            ch.iter_mut().for_each(|s| *s += normal.sample(&mut rng));
        }
    }
    MultichannelAudioFrame::new(channels, scenario.sensors.sample_rate, t)
}

/// One far-field talker with no envelope, for localization tests that do
/// not need a whole meeting.
pub fn far_field_frame(
    array: &MicArrayGeometry,
    azimuth_deg: f64,
    sample_rate: u32,
    frame_len: usize,
    snr_db: f64,
    seed: u64,
) -> Result<MultichannelAudioFrame> {
    let fs = sample_rate as f64;
    let src = ToneSource::new(seed_mix(seed, 0xFA2F_1E1D), (300.0, 3400.0), SPEECH_TONES, SPEECH_RMS);
    let mut channels = vec![vec![0.0; frame_len]; array.len()];
    for (m, ch) in channels.iter_mut().enumerate() {
        let gain = array.directivity()[m].gain(azimuth_deg);
        src.render(ch, 1.0, fs, array.delay(m, azimuth_deg), gain, f64::NEG_INFINITY, f64::INFINITY, &|_| 1.0);
    }
    if snr_db.is_finite() {
        let normal = Normal::new(0.0, SPEECH_RMS * 10f64.powf(-snr_db / 20.0)).map_err(|e| Error::Invalid(e.to_string()))?;
        for (m, ch) in channels.iter_mut().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_mix(seed, 0xA0D1_0000 + m as u64));
            ch.iter_mut().for_each(|s| *s += normal.sample(&mut rng));
        }
    }
    MultichannelAudioFrame::new(channels, sample_rate, 0.0)
}
