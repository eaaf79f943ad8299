//! The four frame stages and the runner that chains them.

use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::time::Instant;

use super::config::{Component, PipelineConfig};
use crate::asd::{
    attach_depth, generate_candidates, select_speaker, AdaBoostModel, AsdResult, CandidateRegion, DetectorConfig,
    FeatureExtractor, FeatureVector, FrameMaps,
};
use crate::audio_ssl::{speech_activity_gate, MicArrayGeometry, MultichannelAudioFrame, SslPdf, SslProcessor};
use crate::error::{Error, Result};
use crate::eval::KpiConfig;
use crate::geometry::CameraIntrinsics;
use crate::io::Dataset;
use crate::sim::{
    ground_truth, render_depth_frame, render_video_frame, seed_mix, synthesize_audio, GroundTruthFrame, RoomScenario,
};
use crate::vc::{vc_step, CropWindow, DecisionRecord, VcInput, VcMode, VcState};
use crate::vision::{estimate_table, normalize_depth, BackgroundModel, DepthFrame, TableExtent, VideoFrame};

pub const STAGE_COUNT: usize = 4;
const QUEUE_DEPTH: usize = 4;

/// Where sensor frames come from.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Simulated(&'a RoomScenario),
    Recorded(&'a Dataset),
}

impl Source<'_> {
    pub fn scenario(&self) -> &RoomScenario {
        match self {
            Source::Simulated(s) => s,
            Source::Recorded(d) => &d.scenario,
        }
    }

    fn audio(&self, t: f64, len: usize) -> Result<MultichannelAudioFrame> {
        let s = self.scenario();
        let span = len as f64 / s.sensors.sample_rate as f64;
        // The window starts at the frame time, pulled back at the very end.
        let start = t.min(s.duration - span).max(0.0);
        match self {
            Source::Simulated(s) => synthesize_audio(s, start, len),
            Source::Recorded(d) => d.audio_at(start, len),
        }
    }

    fn frame(&self, i: usize) -> Result<SensorFrame> {
        let s = self.scenario();
        let t = s.frame_time(i);
        let (video, depth, truth) = match self {
            Source::Simulated(s) => (render_video_frame(s, t)?, render_depth_frame(s, t)?, ground_truth(s, t)?),
            Source::Recorded(d) => (d.video(i)?, d.depth(i)?, d.truth[i].clone()),
        };
        Ok(SensorFrame { index: i, timestamp: t, audio: None, video, depth, truth })
    }
}

/// Wall-clock milliseconds spent per stage on one frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub sense_ms: f64,
    pub ssl_ms: f64,
    pub vision_ms: f64,
    pub features_ms: f64,
    pub asd_ms: f64,
    pub vc_ms: f64,
    /// From entering the first stage to leaving the last, queueing included.
    pub total_ms: f64,
}

impl StageTimings {
    /// Processing time excluding sensor synthesis or file reads.
    pub fn compute_ms(&self) -> f64 {
        self.ssl_ms + self.vision_ms + self.features_ms + self.asd_ms + self.vc_ms
    }

    pub fn stage_sum_ms(&self) -> f64 {
        self.sense_ms + self.compute_ms()
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

struct SensorFrame {
    index: usize,
    timestamp: f64,
    audio: Option<MultichannelAudioFrame>,
    video: VideoFrame,
    depth: DepthFrame,
    truth: GroundTruthFrame,
}

/// Everything the decision stages need from one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TickAnalysis {
    pub index: usize,
    pub timestamp: f64,
    pub gate: bool,
    pub candidates: Vec<CandidateRegion>,
    pub features: Vec<FeatureVector>,
    pub table: TableExtent,
    pub truth: GroundTruthFrame,
}

/// One output record per frame tick.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub analysis: TickAnalysis,
    pub asd: AsdResult,
    pub decision: DecisionRecord,
    pub timings: StageTimings,
}

/// Per-meeting state of the perception stage.
pub struct Perception {
    ssl: SslProcessor,
    extractor: FeatureExtractor,
    video_cam: CameraIntrinsics,
    depth_cam: CameraIntrinsics,
    detector: DetectorConfig,
    detector_seed: u64,
    config: PipelineConfig,
    background: BackgroundModel,
    prev: Option<VideoFrame>,
    table: Option<TableExtent>,
}

impl Perception {
    pub fn new(scenario: &RoomScenario, config: &PipelineConfig) -> Result<Self> {
        config.validate()?;
        let video_cam = scenario.sensors.video_intrinsics()?;
        let depth_cam = scenario.sensors.depth_intrinsics()?;
        let ssl = SslProcessor::new(
            &MicArrayGeometry::default(),
            config.ssl.grid()?,
            config.ssl.frame_len,
            scenario.sensors.sample_rate,
            config.ssl.band(),
        )?;
        let detector = if config.oracle == Some(Component::Detector) { DetectorConfig::Truth } else { config.detector };
        Ok(Self {
            ssl,
            extractor: FeatureExtractor::new(video_cam, depth_cam, config.ssl.epsilon_rel),
            video_cam,
            depth_cam,
            detector,
            detector_seed: seed_mix(config.seed, scenario.seed),
            config: config.clone(),
            background: BackgroundModel::for_fps(scenario.fps),
            prev: None,
            table: None,
        })
    }

    fn pdf(&self, audio: &MultichannelAudioFrame, truth: &GroundTruthFrame) -> Result<SslPdf> {
        if self.config.oracle == Some(Component::Ssl) {
            let grid = self.ssl.grid();
            return Ok(match truth.speaker_truth() {
                Some(p) => SslPdf::delta(grid, p.azimuth_deg),
                None => SslPdf::uniform(grid),
            });
        }
        let pdf = self.ssl.process(audio)?;
        Ok(if self.config.ssl.bias_deg != 0.0 { pdf.shifted(self.config.ssl.bias_deg) } else { pdf })
    }

    fn step(&mut self, f: SensorFrame, timings: &mut StageTimings) -> Result<TickAnalysis> {
        let clock = Instant::now();
        let audio = f.audio.as_ref().ok_or_else(|| Error::Invalid("frame reached perception without audio".into()))?;
        let gate = speech_activity_gate(audio, self.config.ssl.gate_rms);
        let pdf = self.pdf(audio, &f.truth)?;
        timings.ssl_ms = ms_since(clock);

        let clock = Instant::now();
        let depth = normalize_depth(&f.depth);
        if self.table.is_none() {
            // The table does not move; estimate it once from the first
            // depth frame with enough valid pixels.
            self.table = estimate_table(&f.depth, &self.depth_cam).ok();
        }
        let maps = FrameMaps::new(&f.video, self.prev.as_ref(), self.background.background(), &depth)?;
        self.background.update(&f.video)?;
        timings.vision_ms = ms_since(clock);

        let clock = Instant::now();
        let heads = self.detector.detect(&f.truth, f.video.width, f.video.height, self.detector_seed);
        let mut candidates = generate_candidates(&heads, &pdf, &self.video_cam, &self.config.candidate);
        attach_depth(&mut candidates, &depth, &self.video_cam, &self.depth_cam);
        let features = candidates.iter().map(|c| self.extractor.extract(&maps, &pdf, c)).collect::<Result<Vec<_>>>()?;
        timings.features_ms = ms_since(clock);

        self.prev = Some(f.video);
        Ok(TickAnalysis {
            index: f.index,
            timestamp: f.timestamp,
            gate,
            candidates,
            features,
            table: self.table.unwrap_or(TableExtent::Absent),
            truth: f.truth,
        })
    }
}

/// Whether a candidate stands for a given participant.
pub fn candidate_matches(c: &CandidateRegion, p: &crate::sim::ParticipantTruth, kpi: &KpiConfig) -> bool {
    c.bbox.is_some_and(|b| b.iou(&p.bbox) >= kpi.iou_thresh) || (c.azimuth_deg() - p.azimuth_deg).abs() <= kpi.azimuth_tol_deg
}

/// The participant a candidate most plausibly shows: best box overlap,
/// else nearest azimuth, within the match tolerances.
pub fn resolve_participant(c: &CandidateRegion, truth: &GroundTruthFrame, kpi: &KpiConfig) -> Option<usize> {
    let overlap = c.bbox.and_then(|b| {
        truth
            .participants
            .iter()
            .map(|p| (p.id, b.iou(&p.bbox)))
            .filter(|(_, v)| *v >= kpi.iou_thresh)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(id, _)| id)
    });
    overlap.or_else(|| {
        truth
            .participants
            .iter()
            .map(|p| (p.id, (c.azimuth_deg() - p.azimuth_deg).abs()))
            .filter(|(_, d)| *d <= kpi.azimuth_tol_deg)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(id, _)| id)
    })
}

/// Speaker decision for one analysed frame.
pub fn asd_step(a: &TickAnalysis, model: &AdaBoostModel, config: &PipelineConfig) -> Result<AsdResult> {
    let margins = a.features.iter().map(|f| model.score(f.as_slice())).collect::<Result<Vec<_>>>()?;
    if config.oracle == Some(Component::Asd) {
        let chosen = a.truth.speaker_truth().and_then(|sp| {
            let mut best: Option<(usize, f64)> = None;
            for c in a.candidates.iter().filter(|c| candidate_matches(c, sp, &config.kpi)) {
                let s = c.bbox.map_or(0.0, |b| b.iou(&sp.bbox)) - (c.azimuth_deg() - sp.azimuth_deg).abs() * 1e-3;
                if best.is_none_or(|(_, v)| s > v) {
                    best = Some((c.id, s));
                }
            }
            best.map(|(id, _)| id)
        });
        return Ok(AsdResult { scores: margins, selected: chosen, fired: chosen.is_some() });
    }
    Ok(select_speaker(&margins, model.theta_fire, a.gate))
}

/// The cinematographer stage for one meeting.
pub struct Director {
    state: VcState,
    cam: CameraIntrinsics,
    config: PipelineConfig,
}

impl Director {
    pub fn new(scenario: &RoomScenario, config: &PipelineConfig) -> Result<Self> {
        let s = &scenario.sensors;
        Ok(Self {
            state: VcState::new(s.video_width as u32, s.video_height as u32),
            cam: s.video_intrinsics()?,
            config: config.clone(),
        })
    }

    pub fn step(&mut self, a: &TickAnalysis, asd: &AsdResult) -> Result<DecisionRecord> {
        let input = VcInput { asd, candidates: &a.candidates, table: &a.table, t: a.timestamp };
        let crop = vc_step(&mut self.state, input, &self.cam, &self.config.vc)?;
        let target = match self.state.mode {
            VcMode::UpdateGlobal => None,
            _ => self.state.target.map(|t| t.candidate),
        };
        Ok(DecisionRecord { timestamp: a.timestamp, mode: self.state.mode, target, crop })
    }

    pub fn crop(&self) -> CropWindow {
        self.state.crop
    }
}

/// Runs the first two stages over a whole meeting.
pub fn analyze(source: Source<'_>, config: &PipelineConfig) -> Result<Vec<TickAnalysis>> {
    let scenario = source.scenario();
    let mut perception = Perception::new(scenario, config)?;
    (0..scenario.frame_count())
        .map(|i| {
            let mut f = source.frame(i)?;
            f.audio = Some(source.audio(f.timestamp, config.ssl.frame_len)?);
            perception.step(f, &mut StageTimings::default())
        })
        .collect()
}

/// Runs the decision stages over analysed frames. Gives the same decisions
/// as [`run_pipeline`] on the source the analyses came from.
pub fn replay(scenario: &RoomScenario, analyses: &[TickAnalysis], model: &AdaBoostModel, config: &PipelineConfig) -> Result<Vec<FrameRecord>> {
    let mut director = Director::new(scenario, config)?;
    analyses
        .iter()
        .map(|a| {
            let asd = asd_step(a, model, config)?;
            let decision = director.step(a, &asd)?;
            Ok(FrameRecord { analysis: a.clone(), asd, decision, timings: StageTimings::default() })
        })
        .collect()
}

struct InFlight<T> {
    item: T,
    started: Instant,
    timings: StageTimings,
}

fn send<T>(tx: &SyncSender<Result<InFlight<T>>>, v: Result<InFlight<T>>) -> bool {
    tx.send(v).is_ok()
}

/// Senses, perceives, decides and frames every tick of a meeting. With
/// more than one thread each stage runs on its own thread, connected by
/// bounded queues; the records are identical either way apart from timings.
pub fn run_pipeline(source: Source<'_>, model: &AdaBoostModel, config: &PipelineConfig) -> Result<Vec<FrameRecord>> {
    let scenario = source.scenario();
    let n = scenario.frame_count();
    let mut perception = Perception::new(scenario, config)?;
    let mut director = Director::new(scenario, config)?;
    if model.feature_dim != perception.extractor.dim() && config.oracle != Some(Component::Asd) {
        return Err(Error::FeatureDimension { expected: perception.extractor.dim(), got: model.feature_dim });
    }
    let frame_len = config.ssl.frame_len;

    let sense = move |i: usize| -> Result<InFlight<SensorFrame>> {
        let started = Instant::now();
        let mut f = source.frame(i)?;
        f.audio = Some(source.audio(f.timestamp, frame_len)?);
        let timings = StageTimings { sense_ms: ms_since(started), ..Default::default() };
        Ok(InFlight { item: f, started, timings })
    };
    let mut perceive = move |mut x: InFlight<SensorFrame>| -> Result<InFlight<TickAnalysis>> {
        let a = perception.step(x.item, &mut x.timings)?;
        Ok(InFlight { item: a, started: x.started, timings: x.timings })
    };
    let decide = |mut x: InFlight<TickAnalysis>| -> Result<InFlight<(TickAnalysis, AsdResult)>> {
        let clock = Instant::now();
        let asd = asd_step(&x.item, model, config)?;
        x.timings.asd_ms = ms_since(clock);
        Ok(InFlight { item: (x.item, asd), started: x.started, timings: x.timings })
    };
    let mut frame = move |x: InFlight<(TickAnalysis, AsdResult)>| -> Result<FrameRecord> {
        let clock = Instant::now();
        let (analysis, asd) = x.item;
        let decision = director.step(&analysis, &asd)?;
        let mut timings = x.timings;
        timings.vc_ms = ms_since(clock);
        timings.total_ms = ms_since(x.started);
        Ok(FrameRecord { analysis, asd, decision, timings })
    };

    if config.threads <= 1 {
        return (0..n).map(|i| sense(i).and_then(&mut perceive).and_then(decide).and_then(&mut frame)).collect();
    }

    std::thread::scope(|scope| {
        let (tx1, rx1) = sync_channel::<Result<InFlight<SensorFrame>>>(QUEUE_DEPTH);
        let (tx2, rx2) = sync_channel::<Result<InFlight<TickAnalysis>>>(QUEUE_DEPTH);
        let (tx3, rx3) = sync_channel::<Result<InFlight<(TickAnalysis, AsdResult)>>>(QUEUE_DEPTH);
        scope.spawn(move || {
            for i in 0..n {
                let r = sense(i);
                let failed = r.is_err();
                if !send(&tx1, r) || failed {
                    break;
                }
            }
        });
        scope.spawn(move || relay(rx1, &tx2, &mut perceive));
        scope.spawn(move || relay(rx2, &tx3, decide));
        let mut out = Vec::with_capacity(n);
        for r in rx3 {
            out.push(r.and_then(&mut frame)?);
        }
        if out.len() != n {
            return Err(Error::Invalid(format!("pipeline stopped after {} of {n} frames", out.len())));
        }
        Ok(out)
    })
}

fn relay<A, B>(rx: Receiver<Result<InFlight<A>>>, tx: &SyncSender<Result<InFlight<B>>>, mut f: impl FnMut(InFlight<A>) -> Result<InFlight<B>>) {
    for r in rx {
        let r = r.and_then(&mut f);
        let failed = r.is_err();
        if !send(tx, r) || failed {
            break;
        }
    }
}
