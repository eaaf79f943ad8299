//! End-to-end assembly: sensors to crop windows, plus the training and
//! evaluation loops built on it.

mod config;
mod evaluate;
mod run;

pub use config::{Component, Paths, PipelineConfig, SslSettings, TrainingSettings};
pub use evaluate::{
    ablate_with_ground_truth, ablate_with_model, changes_and_cuts, cross_validate, evaluate_meetings, feature_rows, predictions,
    score_meeting, train_model, training_samples, Ablation, CrossValidation, Meeting,
};
pub use run::{
    analyze, asd_step, candidate_matches, replay, resolve_participant, run_pipeline, Director, FrameRecord, Perception,
    Source, StageTimings, TickAnalysis, STAGE_COUNT,
};
