//! Discrete AdaBoost over decision stumps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::features::FeatureFamily;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &str = "vcd-model";
pub const MODEL_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionStump {
    pub feature: usize,
    pub family: FeatureFamily,
    pub threshold: f64,
    /// `+1` votes positive above the threshold, `-1` at or below it.
    pub polarity: i8,
    pub alpha: f64,
}

impl DecisionStump {
    #[inline]
    pub fn predict(&self, x: &[f64]) -> f64 {
        let above = x[self.feature] > self.threshold;
        if above == (self.polarity > 0) {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostModel {
    pub stumps: Vec<DecisionStump>,
    pub theta_fire: f64,
    pub feature_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostConfig {
    pub rounds: usize,
    pub alpha_max: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self { rounds: 100, alpha_max: 10.0 }
    }
}

/// Vote weight of a stump with weighted error `eps`.
pub fn stump_alpha(eps: f64, alpha_max: f64) -> f64 {
    if eps <= 0.0 {
        return alpha_max;
    }
    (0.5 * ((1.0 - eps) / eps).ln()).min(alpha_max)
}

/// Per-round diagnostics from training.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub errors: Vec<f64>,
    /// Exponential loss `Σ exp(−y·F(x))` after each round.
    pub losses: Vec<f64>,
    /// Sum of sample weights after each renormalization.
    pub weight_sums: Vec<f64>,
}

struct SortedFeature {
    order: Vec<u32>,
}

struct Best {
    err: f64,
    feature: usize,
    threshold: f64,
    polarity: i8,
}

fn best_stump(x: &[Vec<f64>], y: &[f64], w: &[f64], sorted: &[SortedFeature]) -> Option<Best> {
    let (mut wp, mut wn) = (0.0, 0.0);
    for (yi, wi) in y.iter().zip(w) {
        if *yi > 0.0 {
            wp += wi;
        } else {
            wn += wi;
        }
    }
    let mut best: Option<Best> = None;
    for (f, sf) in sorted.iter().enumerate() {
        let (mut lp, mut ln) = (0.0, 0.0);
        let ord = &sf.order;
        for k in 0..ord.len() - 1 {
            let i = ord[k] as usize;
            if y[i] > 0.0 {
                lp += w[i];
            } else {
                ln += w[i];
            }
            let (a, b) = (x[i][f], x[ord[k + 1] as usize][f]);
            if a == b {
                continue;
            }
            let threshold = a + (b - a) / 2.0;
            for (polarity, err) in [(1i8, lp + (wn - ln)), (-1i8, ln + (wp - lp))] {
                if best.as_ref().is_none_or(|b| err < b.err) {
                    best = Some(Best { err, feature: f, threshold, polarity });
                }
            }
        }
    }
    best
}

fn check_samples(samples: &[Vec<f64>], labels: &[i8]) -> Result<usize> {
    if samples.is_empty() {
        return Err(Error::Training("no samples".into()));
    }
    if samples.len() != labels.len() {
        return Err(Error::Training(format!("{} samples but {} labels", samples.len(), labels.len())));
    }
    if samples.len() > u32::MAX as usize {
        return Err(Error::Training("too many samples".into()));
    }
    let dim = samples[0].len();
    if dim == 0 {
        return Err(Error::Training("zero-length feature vectors".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::FeatureDimension { expected: dim, got: s.len() });
    }
    if samples.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Training("non-finite feature value".into()));
    }
    if labels.iter().any(|l| *l != 1 && *l != -1) {
        return Err(Error::Training("labels must be +1 or -1".into()));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::Training("need at least one positive and one negative sample".into()));
    }
    Ok(dim)
}

pub fn train_adaboost(samples: &[Vec<f64>], labels: &[i8], config: &BoostConfig) -> Result<AdaBoostModel> {
    train_adaboost_traced(samples, labels, config).map(|(m, _)| m)
}

pub fn train_adaboost_traced(
    samples: &[Vec<f64>],
    labels: &[i8],
    config: &BoostConfig,
) -> Result<(AdaBoostModel, TrainingTrace)> {
    let dim = check_samples(samples, labels)?;
    if config.rounds == 0 {
        return Err(Error::Training("rounds must be at least 1".into()));
    }
    if !(config.alpha_max > 0.0 && config.alpha_max.is_finite()) {
        return Err(Error::Training("alpha_max must be positive".into()));
    }
    let n = samples.len();
    let y: Vec<f64> = labels.iter().map(|l| *l as f64).collect();
    let sorted: Vec<SortedFeature> = (0..dim)
        .map(|f| {
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| samples[a as usize][f].total_cmp(&samples[b as usize][f]).then(a.cmp(&b)));
            SortedFeature { order }
        })
        .collect();

    let mut w = vec![1.0 / n as f64; n];
    let mut margin = vec![0.0; n];
    let mut stumps = Vec::new();
    let mut trace = TrainingTrace::default();
    for _ in 0..config.rounds {
        let Some(best) = best_stump(samples, &y, &w, &sorted) else { break };
        let eps = best.err.max(0.0);
        if eps >= 0.5 - 1e-6 {
            break;
        }
        let alpha = stump_alpha(eps, config.alpha_max);
        let stump = DecisionStump {
            feature: best.feature,
            family: FeatureFamily::of_index(best.feature, dim),
            threshold: best.threshold,
            polarity: best.polarity,
            alpha,
        };
        let mut total = 0.0;
        for i in 0..n {
            let h = stump.predict(&samples[i]);
            margin[i] += alpha * h;
            w[i] *= (-alpha * y[i] * h).exp();
            total += w[i];
        }
        w.iter_mut().for_each(|v| *v /= total);
        stumps.push(stump);
        trace.errors.push(eps);
        trace.losses.push(margin.iter().zip(&y).map(|(m, yi)| (-yi * m).exp()).sum());
        trace.weight_sums.push(w.iter().sum());
        if eps <= 0.0 {
            break;
        }
    }
    if stumps.is_empty() {
        return Err(Error::Training("no stump beats chance".into()));
    }
    Ok((AdaBoostModel { stumps, theta_fire: 0.0, feature_dim: dim }, trace))
}

impl AdaBoostModel {
    pub fn empty(feature_dim: usize) -> Self {
        Self { stumps: Vec::new(), theta_fire: 0.0, feature_dim }
    }

    /// Signed vote `Σ α·h(x)`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_dim {
            return Err(Error::FeatureDimension { expected: self.feature_dim, got: x.len() });
        }
        Ok(self.stumps.iter().map(|s| s.alpha * s.predict(x)).sum())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MODEL_MAGIC} {MODEL_VERSION} {} {} {}\n", self.stumps.len(), self.theta_fire, self.feature_dim);
        for s in &self.stumps {
            let _ = writeln!(out, "{} {} {} {} {}", s.feature, s.family, s.threshold, s.polarity, s.alpha);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse("empty model file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != MODEL_MAGIC || h[1] != MODEL_VERSION {
            return Err(Error::parse_at(1, format!("expected `{MODEL_MAGIC} {MODEL_VERSION} <count> <theta> <dim>`")));
        }
        let num = |s: &str, line: usize| s.parse::<f64>().map_err(|_| Error::parse_at(line, format!("bad number `{s}`")));
        let count: usize = h[2].parse().map_err(|_| Error::parse_at(1, "bad stump count"))?;
        let theta_fire = num(h[3], 1)?;
        let feature_dim: usize = h[4].parse().map_err(|_| Error::parse_at(1, "bad feature dimension"))?;
        if !theta_fire.is_finite() || feature_dim == 0 {
            return Err(Error::parse_at(1, "threshold must be finite and dimension positive"));
        }
        let mut stumps = Vec::new();
        for (i, line) in lines {
            let ln = i + 1;
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 5 {
                return Err(Error::parse_at(ln, "expected `<index> <family> <threshold> <polarity> <alpha>`"));
            }
            let feature: usize = t[0].parse().map_err(|_| Error::parse_at(ln, "bad feature index"))?;
            if feature >= feature_dim {
                return Err(Error::parse_at(ln, format!("feature {feature} outside dimension {feature_dim}")));
            }
            let family: FeatureFamily = t[1].parse().map_err(|e: Error| Error::parse_at(ln, e.to_string()))?;
            let threshold = num(t[2], ln)?;
            let polarity: i8 = match t[3] {
                "1" => 1,
                "-1" => -1,
                _ => return Err(Error::parse_at(ln, "polarity must be 1 or -1")),
            };
            let alpha = num(t[4], ln)?;
            if !threshold.is_finite() || !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::parse_at(ln, "threshold must be finite and alpha positive"));
            }
            stumps.push(DecisionStump { feature, family, threshold, polarity, alpha });
        }
        if stumps.len() != count {
            return Err(Error::parse(format!("header announces {count} stumps, found {}", stumps.len())));
        }
        Ok(Self { stumps, theta_fire, feature_dim })
    }
}

/// Stumps per feature family, with every pipeline family present.
pub fn feature_usage_stats(model: &AdaBoostModel) -> BTreeMap<FeatureFamily, usize> {
    let mut h: BTreeMap<FeatureFamily, usize> = FeatureFamily::PIPELINE.iter().map(|f| (*f, 0)).collect();
    for s in &model.stumps {
        *h.entry(s.family).or_default() += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_for_twenty_percent_error() {
        assert!((stump_alpha(0.2, 10.0) - 0.5 * 4f64.ln()).abs() < 1e-12);
        assert!((stump_alpha(0.2, 10.0) - 0.6931).abs() < 1e-4);
        assert_eq!(stump_alpha(0.0, 10.0), 10.0);
        assert_eq!(stump_alpha(1e-12, 10.0), 10.0);
    }

    #[test]
    fn separable_pair_in_one_round() {
        let (m, tr) = train_adaboost_traced(&[vec![0.0], vec![1.0]], &[-1, 1], &BoostConfig::default()).unwrap();
        assert_eq!(m.stumps.len(), 1);
        let s = m.stumps[0];
        assert_eq!((s.feature, s.threshold, s.polarity, s.alpha), (0, 0.5, 1, 10.0));
        assert_eq!(tr.errors, vec![0.0]);
        assert!(m.score(&[0.0]).unwrap() < 0.0 && m.score(&[1.0]).unwrap() > 0.0);
    }

    #[test]
    fn rejects_bad_training_sets() {
        let cfg = BoostConfig::default();
        assert!(train_adaboost(&[], &[], &cfg).is_err());
        assert!(train_adaboost(&[vec![0.0], vec![1.0]], &[1, 1], &cfg).is_err());
        assert!(train_adaboost(&[vec![0.0], vec![0.0]], &[1, -1], &cfg).is_err());
        assert!(train_adaboost(&[vec![0.0], vec![1.0, 2.0]], &[1, -1], &cfg).is_err());
    }

    #[test]
    fn empty_model_scores_zero() {
        assert_eq!(AdaBoostModel::empty(3).score(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(AdaBoostModel::empty(3).score(&[1.0]).is_err());
    }

    #[test]
    fn hand_built_margin() {
        let m = AdaBoostModel {
            stumps: vec![
                DecisionStump { feature: 0, family: FeatureFamily::Generic, threshold: 0.5, polarity: 1, alpha: 0.5 },
                DecisionStump { feature: 1, family: FeatureFamily::Generic, threshold: 2.0, polarity: -1, alpha: 0.25 },
            ],
            theta_fire: 0.0,
            feature_dim: 2,
        };
        assert_eq!(m.score(&[0.7, 1.0]).unwrap(), 0.75);
        assert_eq!(m.score(&[0.7, 3.0]).unwrap(), 0.25);
        assert_eq!(m.score(&[0.1, 3.0]).unwrap(), -0.75);
    }

    #[test]
    fn usage_counts_families() {
        let st = |family| DecisionStump { feature: 0, family, threshold: 0.0, polarity: 1, alpha: 1.0 };
        let m = AdaBoostModel {
            stumps: vec![st(FeatureFamily::DepthHaar), st(FeatureFamily::DepthHaar), st(FeatureFamily::Ssl)],
            theta_fire: 0.0,
            feature_dim: 1,
        };
        let h = feature_usage_stats(&m);
        assert_eq!(h[&FeatureFamily::DepthHaar], 2);
        assert_eq!(h[&FeatureFamily::Ssl], 1);
        assert_eq!(h.values().sum::<usize>(), 3);
        assert!(feature_usage_stats(&AdaBoostModel::empty(1)).values().all(|c| *c == 0));
    }

    #[test]
    fn text_rejects_garbage() {
        assert!(AdaBoostModel::from_text("").is_err());
        assert!(AdaBoostModel::from_text("vcd-model v2 0 0 1\n").is_err());
        assert!(AdaBoostModel::from_text("vcd-model v1 1 0 1\n").is_err());
        assert!(AdaBoostModel::from_text("vcd-model v1 1 0 1\n3 ssl 0.5 1 1\n").is_err());
        assert!(AdaBoostModel::from_text("vcd-model v1 1 0 1\n0 ssl 0.5 0 1\n").is_err());
        assert!(AdaBoostModel::from_text("vcd-model v1 1 0 1\n0 ssl 0.5 1 0\n").is_err());
        assert!(AdaBoostModel::from_text("vcd-model v1 1 0 1\n0 ssl 0.5 1 0.3\n").is_ok());
    }
}
