//! Training, scoring, cross-validation and oracle ablations over meetings.

use super::config::{Component, PipelineConfig};
use super::run::{analyze, candidate_matches, replay, FrameRecord, Source, TickAnalysis};
use crate::asd::{calibrate_theta, train_adaboost, AdaBoostModel, CalibrationFrame};
use crate::error::{Error, Result};
use crate::io::FeatureRow;
use crate::eval::{compute_kpis, fold_partition, FramePrediction, KpiReport, LatencySummary};
use crate::sim::RoomScenario;
use crate::vc::{measure_decision_latency, CutEvent, SpeakerChange, VcMode};

/// A meeting run through perception once, ready for any number of models.
#[derive(Debug, Clone)]
pub struct Meeting {
    pub scenario: RoomScenario,
    pub ticks: Vec<TickAnalysis>,
}

impl Meeting {
    pub fn analyze(source: Source<'_>, config: &PipelineConfig) -> Result<Self> {
        Ok(Self { scenario: source.scenario().clone(), ticks: analyze(source, config)? })
    }
}

/// Labelled samples: a candidate is positive when it stands for the
/// current speaker. Only frames with the speech gate open contribute.
pub fn training_samples(meetings: &[&Meeting], config: &PipelineConfig) -> (Vec<Vec<f64>>, Vec<i8>) {
    meetings
        .iter()
        .flat_map(|m| feature_rows(m, config))
        .filter(|r| r.gate)
        .map(|r| (r.values, r.label))
        .unzip()
}

fn calibration_frames(meetings: &[&Meeting], model: &AdaBoostModel, config: &PipelineConfig) -> Result<Vec<CalibrationFrame>> {
    let mut out = Vec::new();
    for m in meetings {
        for a in &m.ticks {
            let margins = a.features.iter().map(|f| model.score(f.as_slice())).collect::<Result<Vec<_>>>()?;
            let speaker = a.truth.speaker_truth();
            let correct = a.candidates.iter().map(|c| speaker.is_some_and(|sp| candidate_matches(c, sp, &config.kpi))).collect();
            out.push(CalibrationFrame { margins, correct, speech: speaker.is_some(), gate: a.gate });
        }
    }
    Ok(out)
}

/// Boosts a classifier on most meetings and sets its firing threshold on
/// every `validation_every`-th one. With a single meeting, both use it.
pub fn train_model(meetings: &[&Meeting], config: &PipelineConfig) -> Result<AdaBoostModel> {
    if meetings.is_empty() {
        return Err(Error::Training("no meetings to train on".into()));
    }
    let every = config.training.validation_every;
    let (mut fit, mut val): (Vec<&Meeting>, Vec<&Meeting>) = (Vec::new(), Vec::new());
    for (i, m) in meetings.iter().enumerate() {
        if meetings.len() > 1 && i % every == every - 1 {
            val.push(m);
        } else {
            fit.push(m);
        }
    }
    if val.is_empty() {
        val = fit.clone();
    }
    let (x, y) = training_samples(&fit, config);
    let mut model = train_adaboost(&x, &y, &config.boost)?;
    model.theta_fire = calibrate_theta(&calibration_frames(&val, &model, config)?, config.training.max_fnr).theta;
    Ok(model)
}

/// Per-frame predictions in the form the rate computation takes.
pub fn predictions(records: &[FrameRecord]) -> Vec<FramePrediction> {
    records
        .iter()
        .map(|r| {
            let sel = r.asd.selected.filter(|_| r.asd.fired).and_then(|id| r.analysis.candidates.iter().find(|c| c.id == id));
            FramePrediction {
                timestamp: r.analysis.timestamp,
                fired: r.asd.fired,
                selected: sel.map(|c| (c.bbox, c.azimuth_deg())),
                crop: r.decision.crop,
            }
        })
        .collect()
}

/// Speaker changes as seen in the per-frame truth, and each cut with the
/// participants its target matches under the detection-rate rule.
pub fn changes_and_cuts(records: &[FrameRecord], config: &PipelineConfig) -> (Vec<SpeakerChange>, Vec<CutEvent>) {
    let mut changes = Vec::new();
    let mut last = None;
    let mut cuts = Vec::new();
    for r in records {
        let a = &r.analysis;
        if let Some(sp) = a.truth.speaker {
            if last != Some(sp) {
                changes.push(SpeakerChange { t: a.timestamp, participant: sp });
                last = Some(sp);
            }
        }
        match r.decision.mode {
            VcMode::UpdateCut => {
                let framed = r
                    .decision
                    .target
                    .and_then(|id| a.candidates.iter().find(|c| c.id == id))
                    .map(|c| a.truth.participants.iter().filter(|p| candidate_matches(c, p, &config.kpi)).map(|p| p.id).collect())
                    .unwrap_or_default();
                cuts.push(CutEvent::shot(a.timestamp, framed));
            }
            VcMode::UpdateGlobal => cuts.push(CutEvent::global(a.timestamp)),
            _ => {}
        }
    }
    (changes, cuts)
}

/// Rates and latency for one meeting's records.
pub fn score_meeting(scenario: &RoomScenario, records: &[FrameRecord], config: &PipelineConfig) -> Result<KpiReport> {
    let truth: Vec<_> = records.iter().map(|r| r.analysis.truth.clone()).collect();
    let frame = (scenario.sensors.video_width as u32, scenario.sensors.video_height as u32);
    let counts = compute_kpis(&predictions(records), &truth, frame, &config.kpi)?;
    let (changes, cuts) = changes_and_cuts(records, config);
    let stats = measure_decision_latency(&changes, &cuts, config.vc.t_confirm, config.vc.t_min_shot);
    let mut report = KpiReport::default();
    report.add(scenario.room_class(), &counts, &LatencySummary::from(&stats));
    Ok(report)
}

pub fn evaluate_meetings(meetings: &[&Meeting], model: &AdaBoostModel, config: &PipelineConfig) -> Result<KpiReport> {
    let mut total = KpiReport::default();
    for m in meetings {
        let records = replay(&m.scenario, &m.ticks, model, config)?;
        total.merge(&score_meeting(&m.scenario, &records, config)?);
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct CrossValidation {
    /// Meeting indices per fold.
    pub folds: Vec<Vec<usize>>,
    pub per_fold: Vec<KpiReport>,
    /// Counts pooled over folds, so rates are frame-weighted.
    pub aggregate: KpiReport,
}

/// k-fold cross-validation at meeting granularity.
pub fn cross_validate(meetings: &[Meeting], k: usize, config: &PipelineConfig) -> Result<CrossValidation> {
    let folds = fold_partition(meetings.len(), k, config.seed)?;
    let mut per_fold = Vec::with_capacity(k);
    let mut aggregate = KpiReport::default();
    for fold in &folds {
        let train: Vec<&Meeting> = (0..meetings.len()).filter(|i| !fold.contains(i)).map(|i| &meetings[i]).collect();
        let test: Vec<&Meeting> = fold.iter().map(|&i| &meetings[i]).collect();
        let model = train_model(&train, config)?;
        let report = evaluate_meetings(&test, &model, config)?;
        aggregate.merge(&report);
        per_fold.push(report);
    }
    Ok(CrossValidation { folds, per_fold, aggregate })
}

#[derive(Debug, Clone)]
pub struct Ablation {
    pub component: Component,
    pub baseline: KpiReport,
    pub ablated: KpiReport,
}

/// Cross-validates each arm on its own perception: once as configured,
/// once with `component` replaced by ground truth. Each arm trains its own
/// models, so the classifier sees the substituted inputs in training too.
/// With fewer than two meetings or `folds <= 1` both arms train and test on
/// everything.
pub fn ablate_with_ground_truth(
    scenarios: &[RoomScenario],
    config: &PipelineConfig,
    component: Component,
    folds: usize,
) -> Result<Ablation> {
    let (base_cfg, oracle_cfg) = ablation_configs(config, component);
    let base = analyze_all(scenarios, &base_cfg)?;
    let alt = if component == Component::Asd { base.clone() } else { analyze_all(scenarios, &oracle_cfg)? };
    let arm = |meetings: &[Meeting], cfg: &PipelineConfig| -> Result<KpiReport> {
        if folds <= 1 || meetings.len() < 2 {
            let all: Vec<&Meeting> = meetings.iter().collect();
            return evaluate_meetings(&all, &train_model(&all, cfg)?, cfg);
        }
        Ok(cross_validate(meetings, folds.min(meetings.len()), cfg)?.aggregate)
    };
    Ok(Ablation { component, baseline: arm(&base, &base_cfg)?, ablated: arm(&alt, &oracle_cfg)? })
}

/// Like [`ablate_with_ground_truth`] but scores one fixed model in both arms.
pub fn ablate_with_model(
    scenarios: &[RoomScenario],
    model: &AdaBoostModel,
    config: &PipelineConfig,
    component: Component,
) -> Result<Ablation> {
    let (base_cfg, oracle_cfg) = ablation_configs(config, component);
    let mut baseline = KpiReport::default();
    let mut ablated = KpiReport::default();
    for s in scenarios {
        let base = Meeting::analyze(Source::Simulated(s), &base_cfg)?;
        baseline.merge(&evaluate_meetings(&[&base], model, &base_cfg)?);
        // The decision-stage oracle reuses the baseline perception.
        let alt = if component == Component::Asd { base } else { Meeting::analyze(Source::Simulated(s), &oracle_cfg)? };
        ablated.merge(&evaluate_meetings(&[&alt], model, &oracle_cfg)?);
    }
    Ok(Ablation { component, baseline, ablated })
}

fn ablation_configs(config: &PipelineConfig, component: Component) -> (PipelineConfig, PipelineConfig) {
    (PipelineConfig { oracle: None, ..config.clone() }, PipelineConfig { oracle: Some(component), ..config.clone() })
}

fn analyze_all(scenarios: &[RoomScenario], config: &PipelineConfig) -> Result<Vec<Meeting>> {
    scenarios.iter().map(|s| Meeting::analyze(Source::Simulated(s), config)).collect()
}

/// Labelled feature vectors of every `stride`-th frame.
pub fn feature_rows(meeting: &Meeting, config: &PipelineConfig) -> Vec<FeatureRow> {
    let mut rows = Vec::new();
    for a in meeting.ticks.iter().step_by(config.training.stride) {
        let speaker = a.truth.speaker_truth();
        for (c, f) in a.candidates.iter().zip(&a.features) {
            rows.push(FeatureRow {
                frame: a.index,
                candidate: c.id,
                gate: a.gate,
                label: if speaker.is_some_and(|sp| candidate_matches(c, sp, &config.kpi)) { 1 } else { -1 },
                values: f.0.clone(),
            });
        }
    }
    rows
}
