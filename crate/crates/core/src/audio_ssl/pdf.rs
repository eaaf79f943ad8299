//! Phase-transform cross-correlation steered over an azimuth grid.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::array::{MicArrayGeometry, MultichannelAudioFrame};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthGrid {
    pub min_deg: f64,
    pub max_deg: f64,
    pub step_deg: f64,
}

impl AzimuthGrid {
    pub fn new(min_deg: f64, max_deg: f64, step_deg: f64) -> Result<Self> {
        if !(min_deg < max_deg) || !(step_deg > 0.0) || !min_deg.is_finite() || !max_deg.is_finite() {
            return Err(Error::Geometry(format!("bad azimuth grid [{min_deg}, {max_deg}] step {step_deg}")));
        }
        Ok(Self { min_deg, max_deg, step_deg })
    }

    pub fn len(&self) -> usize {
        ((self.max_deg - self.min_deg) / self.step_deg + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle(&self, bin: usize) -> f64 {
        self.min_deg + bin as f64 * self.step_deg
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.angle(i))
    }

    /// Nearest bin to `deg`, clamped to the grid.
    pub fn nearest_bin(&self, deg: f64) -> usize {
        let i = ((deg - self.min_deg) / self.step_deg).round();
        i.clamp(0.0, (self.len() - 1) as f64) as usize
    }
}

impl Default for AzimuthGrid {
    /// 1° steps across the 100° horizontal field of view.
    fn default() -> Self {
        Self { min_deg: -50.0, max_deg: 50.0, step_deg: 1.0 }
    }
}

/// Normalized azimuth likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct SslPdf {
    pub grid: AzimuthGrid,
    pub values: Vec<f64>,
}

impl SslPdf {
    pub fn uniform(grid: AzimuthGrid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![1.0 / n as f64; n] }
    }

    /// Normalizes `scores` (negative entries floored at 0). An all-zero
    /// input gives the uniform PDF.
    pub fn from_scores(grid: AzimuthGrid, mut scores: Vec<f64>) -> Result<Self> {
        if scores.len() != grid.len() {
            return Err(Error::Invalid(format!("{} scores for a {}-bin grid", scores.len(), grid.len())));
        }
        for s in &mut scores {
            if !s.is_finite() || *s < 0.0 {
                *s = 0.0;
            }
        }
        let total: f64 = scores.iter().sum();
        if total <= 0.0 {
            return Ok(Self::uniform(grid));
        }
        scores.iter_mut().for_each(|s| *s /= total);
        Ok(Self { grid, values: scores })
    }

    /// All mass in the bin nearest `azimuth_deg`.
    pub fn delta(grid: AzimuthGrid, azimuth_deg: f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        values[grid.nearest_bin(azimuth_deg)] = 1.0;
        Self { grid, values }
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn argmax_deg(&self) -> f64 {
        self.grid.angle(self.argmax())
    }

    pub fn max(&self) -> f64 {
        self.values[self.argmax()]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Shift the likelihood by `deg` (rounded to whole bins);
    /// bins shifted in from outside the grid take the minimum value.
    pub fn shifted(&self, deg: f64) -> Self {
        let k = (deg / self.grid.step_deg).round() as isize;
        let n = self.values.len() as isize;
        let floor = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut values = vec![floor; self.values.len()];
        for i in 0..n {
            let src = i - k;
            if (0..n).contains(&src) {
                values[i as usize] = self.values[src as usize];
            }
        }
        let total: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v /= total);
        Self { grid: self.grid, values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SslConfig {
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
}

impl Default for SslConfig {
    fn default() -> Self {
        Self { band_lo_hz: 200.0, band_hi_hz: 4000.0 }
    }
}

/// Precomputed FFT plan and steering phasors for one array, grid and frame
/// length.
pub struct SslProcessor {
    array: MicArrayGeometry,
    grid: AzimuthGrid,
    frame_len: usize,
    sample_rate: u32,
    fft: Arc<dyn Fft<f64>>,
    n_fft: usize,
    window: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    bins: Vec<usize>,
    // [pair][azimuth][bin]
    steering: Vec<Complex64>,
}

impl SslProcessor {
    pub fn new(
        array: &MicArrayGeometry,
        grid: AzimuthGrid,
        frame_len: usize,
        sample_rate: u32,
        config: SslConfig,
    ) -> Result<Self> {
        let needed = array.max_delay_samples(sample_rate);
        if frame_len < needed.max(1) {
            return Err(Error::FrameTooShort { len: frame_len, needed });
        }
        let n_fft = (2 * frame_len).next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        let fs = sample_rate as f64;
        let bins: Vec<usize> = (1..n_fft / 2)
            .filter(|&k| {
                let f = k as f64 * fs / n_fft as f64;
                f >= config.band_lo_hz && f <= config.band_hi_hz
            })
            .collect();
        if bins.is_empty() {
            return Err(Error::Invalid("SSL band contains no FFT bins".into()));
        }
        let mut pairs = Vec::new();
        for i in 0..array.len() {
            for j in i + 1..array.len() {
                pairs.push((i, j));
            }
        }
        let mut steering = Vec::with_capacity(pairs.len() * grid.len() * bins.len());
        for &(i, j) in &pairs {
            for az in grid.angles() {
                let tau = (array.positions()[i] - array.positions()[j]) * az.to_radians().sin()
                    / array.speed_of_sound();
                for &k in &bins {
                    let omega = 2.0 * std::f64::consts::PI * k as f64 * fs / n_fft as f64;
                    steering.push(Complex64::from_polar(1.0, omega * tau));
                }
            }
        }
        let window = (0..frame_len)
            .map(|n| 0.5 - 0.5 * (std::f64::consts::TAU * n as f64 / frame_len as f64).cos())
            .collect();
        Ok(Self {
            array: array.clone(),
            window,
            grid,
            frame_len,
            sample_rate,
            fft,
            n_fft,
            pairs,
            bins,
            steering,
        })
    }

    pub fn grid(&self) -> AzimuthGrid {
        self.grid
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn process(&self, frame: &MultichannelAudioFrame) -> Result<SslPdf> {
        if frame.channel_count() != self.array.len() {
            return Err(Error::ChannelMismatch { expected: self.array.len(), got: frame.channel_count() });
        }
        let needed = self.array.max_delay_samples(self.sample_rate);
        if frame.len() < needed.max(1) {
            return Err(Error::FrameTooShort { len: frame.len(), needed });
        }
        if frame.channels.iter().all(|c| c.iter().all(|s| *s == 0.0)) {
            return Ok(SslPdf::uniform(self.grid));
        }

        // Frames longer than the planned length are truncated; shorter ones
        // are zero-padded.
        let spectra: Vec<Vec<Complex64>> = frame
            .channels
            .iter()
            .map(|c| {
                let mut buf = vec![Complex64::new(0.0, 0.0); self.n_fft];
                for ((b, s), w) in buf.iter_mut().zip(c.iter()).zip(&self.window) {
                    b.re = *s * w;
                }
                self.fft.process(&mut buf);
                buf
            })
            .collect();

        let n_bins = self.bins.len();
        let n_az = self.grid.len();
        let mut scores = vec![0.0; n_az];
        let mut cross = vec![Complex64::new(0.0, 0.0); n_bins];
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            for (c, &k) in cross.iter_mut().zip(&self.bins) {
                let g = spectra[i][k] * spectra[j][k].conj();
                let mag = g.norm();
                *c = if mag > 1e-12 { g / mag } else { Complex64::new(0.0, 0.0) };
            }
            let base = p * n_az * n_bins;
            for (a, score) in scores.iter_mut().enumerate() {
                let steer = &self.steering[base + a * n_bins..base + (a + 1) * n_bins];
                let r: f64 = cross.iter().zip(steer).map(|(c, s)| c.re * s.re - c.im * s.im).sum::<f64>()
                    / n_bins as f64;
                *score += 0.5 * (1.0 + r);
            }
        }
        SslPdf::from_scores(self.grid, scores)
    }
}

/// One-shot SSL. Pipelines should hold an [`SslProcessor`] instead.
pub fn compute_ssl_pdf(
    frame: &MultichannelAudioFrame,
    array: &MicArrayGeometry,
    grid: AzimuthGrid,
) -> Result<SslPdf> {
    if frame.channel_count() != array.len() {
        return Err(Error::ChannelMismatch { expected: array.len(), got: frame.channel_count() });
    }
    let proc = SslProcessor::new(array, grid, frame.len(), frame.sample_rate, SslConfig::default())?;
    proc.process(frame)
}
