use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vcd_core::asd::{feature_usage_stats, AdaBoostModel, FEATURE_DIM};
use vcd_core::io::{
    create_dir, encode_decisions, encode_features, encode_predictions, read_text, write_atomic, write_dataset, Dataset,
};
use vcd_core::pipeline::{
    ablate_with_ground_truth, ablate_with_model, cross_validate, evaluate_meetings, feature_rows, predictions, run_pipeline, score_meeting,
    train_model, Component, FrameRecord, Meeting, PipelineConfig, Source,
};
use vcd_core::sim::{parse_scenario, suite, PresetOptions, RoomScenario};
use vcd_core::vc::percentile;

#[derive(Parser, Debug)]
#[command(name = "vcd", version, about = "Active speaker detection and virtual cinematography on simulated meetings")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a scenario to a dataset directory (audio, frames, truth).
    Simulate(Common),
    /// Write labelled feature vectors as CSV.
    Features(Common),
    /// Train a speaker classifier and write it as a model file.
    Train(Common),
    /// Run the pipeline on one meeting; writes decisions, predictions and a report.
    Run(Common),
    /// Score a model, or cross-validate with --folds.
    Evaluate(Common),
    /// Compare KPIs with and without a ground-truth component.
    Ablate(Common),
    /// Per-frame stage timings.
    Bench(Common),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Scenario file, or a directory of them. Defaults to the built-in suite.
    #[arg(long, conflicts_with = "dataset")]
    scenario: Option<PathBuf>,
    /// Dataset directory, or a directory of them.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Pipeline configuration (TOML). Flags take precedence over its paths.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    component: Option<Component>,
    /// Override the scenario frame rate.
    #[arg(long)]
    fps: Option<f64>,
}

const DEFAULT_FOLDS: usize = 4;

/// Flags merged over the configuration file.
struct Ctx {
    config: PipelineConfig,
    fps: Option<f64>,
    folds: Option<usize>,
    component: Option<Component>,
    seed_flag: bool,
}

impl Ctx {
    fn new(a: Common) -> Result<Self> {
        let mut config = match &a.config {
            Some(p) => PipelineConfig::from_toml(&read_text(p)?).with_context(|| format!("reading {}", p.display()))?,
            None => PipelineConfig::default(),
        };
        let paths = &mut config.paths;
        if a.scenario.is_some() || a.dataset.is_some() {
            paths.scenario = a.scenario;
            paths.dataset = a.dataset;
        }
        if paths.scenario.is_some() && paths.dataset.is_some() {
            bail!("give either a scenario or a dataset, not both");
        }
        paths.model = a.model.or(paths.model.take());
        paths.out = a.out.or(paths.out.take());
        if let Some(s) = a.seed {
            config.seed = s;
        }
        if let Some(f) = a.fps {
            if !(f > 0.0 && f.is_finite()) {
                bail!("--fps must be positive");
            }
        }
        if a.folds == Some(0) {
            bail!("--folds must be at least 1");
        }
        Ok(Self { config, fps: a.fps, folds: a.folds, component: a.component, seed_flag: a.seed.is_some() })
    }

    fn out(&self) -> Result<&Path> {
        self.config.paths.out.as_deref().context("--out is required")
    }

    fn model(&self) -> Result<AdaBoostModel> {
        let p = self.config.paths.model.as_deref().context("--model is required")?;
        Ok(AdaBoostModel::from_text(&read_text(p)?).with_context(|| format!("reading {}", p.display()))?)
    }

    fn adjust(&self, mut s: RoomScenario) -> Result<RoomScenario> {
        if let Some(f) = self.fps {
            s.fps = f;
        }
        Ok(RoomScenario::parse(&s.to_canonical())?)
    }

    fn scenarios(&self) -> Result<Vec<RoomScenario>> {
        if self.config.paths.dataset.is_some() {
            bail!("this command simulates; pass --scenario");
        }
        let list = match &self.config.paths.scenario {
            Some(p) => scenario_files(p)?
                .iter()
                .map(|f| parse_scenario(&read_text(f)?).with_context(|| format!("parsing {}", f.display())))
                .collect::<Result<Vec<_>>>()?,
            None => suite(&PresetOptions::default())?,
        };
        list.into_iter().map(|s| self.adjust(s)).collect()
    }

    /// Meetings from datasets when given, otherwise simulated scenarios.
    fn meetings(&self) -> Result<Vec<Meeting>> {
        match &self.config.paths.dataset {
            Some(p) => dataset_dirs(p)?
                .iter()
                .map(|d| {
                    let ds = Dataset::open(d).with_context(|| format!("opening {}", d.display()))?;
                    Ok(Meeting::analyze(Source::Recorded(&ds), &self.config)?)
                })
                .collect(),
            None => self.scenarios()?.iter().map(|s| Ok(Meeting::analyze(Source::Simulated(s), &self.config)?)).collect(),
        }
    }

    fn single_source<T>(&self, f: impl FnOnce(Source<'_>) -> Result<T>) -> Result<T> {
        if let Some(d) = &self.config.paths.dataset {
            if self.fps.is_some() {
                bail!("--fps cannot change a recorded dataset");
            }
            let ds = Dataset::open(d).with_context(|| format!("opening {}", d.display()))?;
            return f(Source::Recorded(&ds));
        }
        let p = self.config.paths.scenario.as_deref().context("--scenario or --dataset is required")?;
        if p.is_dir() {
            bail!("{} is a directory; this command takes one scenario", p.display());
        }
        let s = self.adjust(parse_scenario(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?)?;
        f(Source::Simulated(&s))
    }
}

fn sorted_entries(dir: &Path, keep: impl Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    let mut v = Vec::new();
    for e in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let p = e?.path();
        if keep(&p) {
            v.push(p);
        }
    }
    v.sort();
    Ok(v)
}

fn scenario_files(p: &Path) -> Result<Vec<PathBuf>> {
    if !p.is_dir() {
        return Ok(vec![p.to_path_buf()]);
    }
    let v = sorted_entries(p, |f| f.extension().is_some_and(|e| e == "toml"))?;
    if v.is_empty() {
        bail!("no .toml scenarios in {}", p.display());
    }
    Ok(v)
}

fn dataset_dirs(p: &Path) -> Result<Vec<PathBuf>> {
    if p.join(vcd_core::io::SCENARIO_FILE).is_file() {
        return Ok(vec![p.to_path_buf()]);
    }
    let v = sorted_entries(p, |d| d.join(vcd_core::io::SCENARIO_FILE).is_file())?;
    if v.is_empty() {
        bail!("no datasets in {}", p.display());
    }
    Ok(v)
}

fn simulate(ctx: &Ctx) -> Result<()> {
    let out = ctx.out()?;
    let mut scenarios = ctx.scenarios()?;
    if ctx.seed_flag {
        for s in &mut scenarios {
            s.seed = ctx.config.seed;
        }
    }
    if ctx.config.paths.scenario.as_deref().is_some_and(|p| !p.is_dir()) {
        write_dataset(&scenarios[0], out)?;
        println!("wrote {} frames to {}", scenarios[0].frame_count(), out.display());
        return Ok(());
    }
    for s in &scenarios {
        write_dataset(s, &out.join(&s.name))?;
    }
    println!("wrote {} datasets to {}", scenarios.len(), out.display());
    Ok(())
}

fn features(ctx: &Ctx) -> Result<()> {
    let out = ctx.out()?;
    let rows: Vec<_> = ctx.meetings()?.iter().flat_map(|m| feature_rows(m, &ctx.config)).collect();
    write_atomic(out, encode_features(&rows)?.as_bytes())?;
    println!("wrote {} feature rows to {}", rows.len(), out.display());
    Ok(())
}

fn train(ctx: &Ctx) -> Result<()> {
    let out = ctx.out()?;
    let meetings = ctx.meetings()?;
    let refs: Vec<&Meeting> = meetings.iter().collect();
    let model = train_model(&refs, &ctx.config)?;
    write_atomic(out, model.to_text().as_bytes())?;
    println!("{} stumps, theta_fire = {}", model.stumps.len(), model.theta_fire);
    for (family, n) in feature_usage_stats(&model) {
        println!("  {:<12} {n}", family.as_str());
    }
    Ok(())
}

fn model_or_empty(ctx: &Ctx) -> Result<AdaBoostModel> {
    // The ground-truth selector needs no classifier.
    if ctx.config.paths.model.is_none() && ctx.config.oracle == Some(Component::Asd) {
        return Ok(AdaBoostModel::empty(FEATURE_DIM));
    }
    ctx.model()
}

fn run(ctx: &Ctx) -> Result<()> {
    let out = ctx.out()?.to_path_buf();
    let model = model_or_empty(ctx)?;
    ctx.single_source(|src| {
        let records = run_pipeline(src, &model, &ctx.config)?;
        let report = score_meeting(src.scenario(), &records, &ctx.config)?;
        create_dir(&out)?;
        let decisions: Vec<_> = records.iter().map(|r| r.decision.clone()).collect();
        write_atomic(&out.join("decisions.csv"), encode_decisions(&decisions)?.as_bytes())?;
        write_atomic(&out.join("predictions.csv"), encode_predictions(&predictions(&records))?.as_bytes())?;
        write_atomic(&out.join("report.txt"), report.to_text().as_bytes())?;
        write_atomic(&out.join("timings.csv"), timings_csv(&records).as_bytes())?;
        println!("{} frames, report in {}", records.len(), out.join("report.txt").display());
        Ok(())
    })
}

fn evaluate(ctx: &Ctx) -> Result<()> {
    let out = ctx.out()?;
    let meetings = ctx.meetings()?;
    let report = match ctx.folds {
        Some(k) => {
            if ctx.config.paths.model.is_some() {
                bail!("--folds trains its own models; drop --model");
            }
            let cv = cross_validate(&meetings, k, &ctx.config)?;
            for (i, (fold, r)) in cv.folds.iter().zip(&cv.per_fold).enumerate() {
                println!("fold {i}: meetings {fold:?} asr {}", opt(r.total.asr()));
            }
            cv.aggregate
        }
        None => {
            let refs: Vec<&Meeting> = meetings.iter().collect();
            evaluate_meetings(&refs, &model_or_empty(ctx)?, &ctx.config)?
        }
    };
    write_atomic(out, report.to_text().as_bytes())?;
    println!(
        "sdr {} pdr {} fnr {} asr {} latency p95 {} ms",
        opt(report.total.sdr()),
        opt(report.total.pdr()),
        opt(report.total.fnr()),
        opt(report.total.asr()),
        opt(report.latency.p95_ms())
    );
    Ok(())
}

fn ablate(ctx: &Ctx) -> Result<()> {
    let component = ctx.component.context("--component is required (ssl, asd or detector)")?;
    let out = ctx.out()?;
    let scenarios = ctx.scenarios()?;
    // A given model is scored as is; otherwise each arm is cross-validated.
    let a = match ctx.config.paths.model {
        Some(_) => ablate_with_model(&scenarios, &ctx.model()?, &ctx.config, component)?,
        None => ablate_with_ground_truth(&scenarios, &ctx.config, component, ctx.folds.unwrap_or(DEFAULT_FOLDS))?,
    };
    let mut text = String::new();
    let _ = writeln!(text, "# component = {component}");
    for (name, r) in [("baseline", &a.baseline), ("ablated", &a.ablated)] {
        let _ = writeln!(text, "# {name}");
        for line in r.to_text().lines() {
            let _ = writeln!(text, "{name}.{line}");
        }
    }
    write_atomic(out, text.as_bytes())?;
    for (k, b, x) in [
        ("sdr", a.baseline.total.sdr(), a.ablated.total.sdr()),
        ("pdr", a.baseline.total.pdr(), a.ablated.total.pdr()),
        ("fnr", a.baseline.total.fnr(), a.ablated.total.fnr()),
        ("asr", a.baseline.total.asr(), a.ablated.total.asr()),
    ] {
        println!("{k}: {} -> {}", opt(b), opt(x));
    }
    Ok(())
}

fn bench(ctx: &Ctx) -> Result<()> {
    // Timing does not depend on the classifier's weights.
    let model = match ctx.config.paths.model {
        Some(_) => ctx.model()?,
        None => AdaBoostModel::empty(FEATURE_DIM),
    };
    let started = Instant::now();
    let records = ctx.single_source(|src| Ok(run_pipeline(src, &model, &ctx.config)?))?;
    let wall = started.elapsed().as_secs_f64();
    let mut text = String::new();
    let _ = writeln!(text, "frames = {}", records.len());
    let _ = writeln!(text, "threads = {}", ctx.config.threads);
    let _ = writeln!(text, "wall_s = {wall:.3}");
    let cols: [(&str, fn(&FrameRecord) -> f64); 8] = [
        ("sense", |r| r.timings.sense_ms),
        ("ssl", |r| r.timings.ssl_ms),
        ("vision", |r| r.timings.vision_ms),
        ("features", |r| r.timings.features_ms),
        ("asd", |r| r.timings.asd_ms),
        ("vc", |r| r.timings.vc_ms),
        ("compute", |r| r.timings.compute_ms()),
        ("total", |r| r.timings.total_ms),
    ];
    for (name, f) in cols {
        let v: Vec<f64> = records.iter().map(f).collect();
        let _ = writeln!(text, "{name}_p50_ms = {:.3}", percentile(&v, 50.0).unwrap_or(0.0));
        let _ = writeln!(text, "{name}_p95_ms = {:.3}", percentile(&v, 95.0).unwrap_or(0.0));
    }
    if let Some(p) = &ctx.config.paths.out {
        write_atomic(p, text.as_bytes())?;
    }
    print!("{text}");
    Ok(())
}

fn timings_csv(records: &[FrameRecord]) -> String {
    let mut s = String::from("timestamp,sense_ms,ssl_ms,vision_ms,features_ms,asd_ms,vc_ms,total_ms\n");
    for r in records {
        let t = &r.timings;
        let _ = writeln!(
            s,
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.analysis.timestamp, t.sense_ms, t.ssl_ms, t.vision_ms, t.features_ms, t.asd_ms, t.vc_ms, t.total_ms
        );
    }
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "na".into(), |v| format!("{v:.4}"))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&Ctx::new(a)?),
        Command::Features(a) => features(&Ctx::new(a)?),
        Command::Train(a) => train(&Ctx::new(a)?),
        Command::Run(a) => run(&Ctx::new(a)?),
        Command::Evaluate(a) => evaluate(&Ctx::new(a)?),
        Command::Ablate(a) => ablate(&Ctx::new(a)?),
        Command::Bench(a) => bench(&Ctx::new(a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
