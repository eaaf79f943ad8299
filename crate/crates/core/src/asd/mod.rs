//! Active speaker detection: candidates, multimodal features, boosted
//! stumps and speaker selection.

mod boost;
mod candidate;
mod detector;
mod features;
mod select;

pub use boost::{
    feature_usage_stats, stump_alpha, train_adaboost, train_adaboost_traced, AdaBoostModel, BoostConfig,
    DecisionStump, TrainingTrace, MODEL_MAGIC, MODEL_VERSION,
};
pub use candidate::{
    attach_depth, candidate_depth, generate_candidates, CandidateConfig, CandidateRegion, CandidateSource, DetectedHead,
};
pub use detector::DetectorConfig;
pub use features::{FeatureExtractor, FeatureFamily, FeatureVector, FrameMaps, FEATURE_DIM, HAAR_COUNT};
pub use select::{calibrate_theta, select_speaker, AsdResult, CalibrationFrame, Operating};

/// Margin of one candidate.
pub fn score_candidate(model: &AdaBoostModel, fv: &FeatureVector) -> crate::Result<f64> {
    model.score(fv.as_slice())
}
