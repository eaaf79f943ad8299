//! The fifteen local/global extrema features of an azimuth likelihood.

use super::pdf::SslPdf;
use crate::error::{Error, Result};

pub const SSL_FEATURE_COUNT: usize = 15;
pub const DEFAULT_EPSILON_REL: f64 = 1e-3;

const DENOM_FLOOR: f64 = 1e-9;

/// Local statistics (`l_*`, over a candidate's azimuth span) and global
/// statistics (`g_*`, over the whole PDF).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SslWindowStats {
    pub l_max: f64,
    pub l_min: f64,
    pub l_avg: f64,
    pub l_mid: f64,
    pub g_max: f64,
    pub g_min: f64,
    pub g_avg: f64,
    pub epsilon_rel: f64,
}

impl SslWindowStats {
    pub fn from_pdf(pdf: &SslPdf, span: (f64, f64), epsilon_rel: f64) -> Result<Self> {
        let bins = span_bins(pdf, span)?;
        let local: Vec<f64> = bins.clone().map(|i| pdf.values[i]).collect();
        let mid_deg = 0.5 * (span.0 + span.1);
        let mid_bin = pdf.grid.nearest_bin(mid_deg).clamp(*bins.start(), *bins.end());
        let (g_min, g_max) = min_max(&pdf.values);
        let (l_min, l_max) = min_max(&local);
        Ok(Self {
            l_max,
            l_min,
            l_avg: local.iter().sum::<f64>() / local.len() as f64,
            l_mid: pdf.values[mid_bin],
            g_max,
            g_min,
            g_avg: pdf.values.iter().sum::<f64>() / pdf.values.len() as f64,
            epsilon_rel,
        })
    }

    pub fn features(&self) -> SslFeatureVector {
        let s = self;
        let ratio = |num: f64, den: f64| num / den.max(DENOM_FLOOR);
        let g_range = s.g_max - s.g_min;
        let rel = |v: f64| if g_range < DENOM_FLOOR { 0.5 } else { (v - s.g_min) / g_range };
        SslFeatureVector([
            rel(s.l_max),
            rel(s.l_min),
            rel(s.l_avg),
            rel(s.l_mid),
            ratio(s.l_max, s.l_min),
            ratio(s.l_max, s.l_avg),
            ratio(s.l_min, s.l_avg),
            ratio(s.l_min, s.g_avg),
            ratio(s.l_max - s.l_min, s.l_avg),
            ratio(s.l_max, s.g_max),
            ratio(s.l_min, s.g_max),
            ratio(s.l_avg, s.g_max),
            ratio(s.l_mid, s.g_max),
            ratio(s.l_max - s.l_min, s.g_max),
            if s.g_max - s.l_max < s.epsilon_rel * s.g_max { 1.0 } else { 0.0 },
        ])
    }
}

/// `values[0]` is feature 1; the last entry (feature 15) is 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SslFeatureVector(pub [f64; SSL_FEATURE_COUNT]);

impl SslFeatureVector {
    /// One-based accessor matching the conventional feature numbering.
    pub fn f(&self, n: usize) -> f64 {
        self.0[n - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn holds_global_max(&self) -> bool {
        self.0[14] == 1.0
    }
}

pub fn extract_ssl_features(pdf: &SslPdf, span: (f64, f64), epsilon_rel: f64) -> Result<SslFeatureVector> {
    if !(epsilon_rel > 0.0) {
        return Err(Error::Invalid(format!("epsilon_rel {epsilon_rel} must be positive")));
    }
    Ok(SslWindowStats::from_pdf(pdf, span, epsilon_rel)?.features())
}

/// Grid bins whose centres fall inside `span`. A span narrower than a bin
/// that still overlaps the grid maps to the bin nearest its midpoint.
fn span_bins(pdf: &SslPdf, span: (f64, f64)) -> Result<std::ops::RangeInclusive<usize>> {
    let (lo, hi) = if span.0 <= span.1 { span } else { (span.1, span.0) };
    let g = pdf.grid;
    let half = g.step_deg / 2.0;
    if !(hi >= g.min_deg - half && lo <= g.max_deg + half) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::EmptySpan { lo, hi });
    }
    let first = ((lo - g.min_deg) / g.step_deg - 1e-9).ceil().max(0.0) as usize;
    let last_f = ((hi - g.min_deg) / g.step_deg + 1e-9).floor();
    if last_f < 0.0 || first as f64 > last_f || first >= g.len() {
        let b = g.nearest_bin(0.5 * (lo + hi));
        return Ok(b..=b);
    }
    let last = (last_f as usize).min(g.len() - 1);
    Ok(first..=last)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)))
}
