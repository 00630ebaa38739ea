//! Subcommands: anonymize, augment, score, eval, train-weights, pipeline.
//!
//! Exit status: 0 on success, 1 when some records failed but the run
//! completed, 2 for invalid invocations, configuration or unreadable inputs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use privpas_core::anonymizer::{anonymize_image_with, enlarge_box_with, EnlargeMode};
use privpas_core::evaluator::{awareness_eval, evaluate_detections, Interpolation};
use privpas_core::providers::{checked_landmarks, select_poi_face, DetectionProvider, LandmarkProvider};
use privpas_core::trainer::train_weights_traced;
use privpas_core::{
    augment_dataset, awareness_score, classification_metrics, classify_awareness, rotational_factor, Aggregation,
    AwarenessWeights, BlurParams, BoundingBox, ConfusionCounts, DatasetManifest, GazeConfig, TrainParams,
};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::formats::manifest::{load_manifest, render_manifest};
use crate::formats::weights::{load_weights, render_weights};
use crate::formats::{box_to_wire, features::load_features, WireBox};
use crate::image_io::{load_image, save_png};
use crate::pipeline::{render_decisions, Pipeline};
use crate::providers::{FileDetectionProvider, FileLandmarkProvider};
use crate::render::{annotate, pr_curves_svg};
use crate::report::{
    aggregation_label, classification_section, detection_section, exclusion_reason, render_json, render_pr_csv,
    render_summary, ExcludedEntry, MetricsReport,
};
use crate::store::{resolve, FsImageStore};
use crate::write_text;

#[derive(Debug, Parser)]
#[command(name = "privpas", version, about = "Privacy-aware accessibility-marker pipeline")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Write annotated PNGs next to pipeline decisions.
    #[arg(long, global = true)]
    pub emit_annotated: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Blur enlarged face boxes and write PNGs.
    Anonymize(AnonymizeArgs),
    /// Expand a manifest with box-aware augmentations.
    Augment(AugmentArgs),
    /// Score every face in a landmarks file.
    Score(ScoreArgs),
    /// Detection mAP, awareness confusion counts, or metrics from given counts.
    Eval(EvalArgs),
    /// Fit awareness weights by logistic regression.
    TrainWeights(TrainArgs),
    /// Detect, crop, score and decide consent cues.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct AnonymizeArgs {
    /// Images to anonymize (keys into the faces file).
    pub images: Vec<String>,
    /// Take images (and faces, when --faces is absent) from a manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Landmarks JSON Lines file supplying face boxes.
    #[arg(long)]
    pub faces: Option<PathBuf>,
    #[arg(long)]
    pub kernel_size: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Pad faces by this fraction of their size instead of the coordinate rule.
    #[arg(long)]
    pub pad_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub per_image: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub landmarks: PathBuf,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub tau_r_deg: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// Face landmarks for awareness evaluation.
    #[arg(long)]
    pub landmarks: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// min | avg | poi
    #[arg(long)]
    pub aggregate: Option<String>,
    /// Confusion counts `[label=]TP,TN,FP,FN`; repeatable.
    #[arg(long)]
    pub confusion: Vec<String>,
    #[arg(long)]
    pub iou_threshold: Option<f64>,
    #[arg(long)]
    pub eleven_point: bool,
    /// Also write pr_curves.svg.
    #[arg(long)]
    pub plot: bool,
    /// Print the JSON report instead of the text summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// CSV of observations or regressors with an `aware` column.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 5000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    #[arg(long)]
    pub tau_r_deg: Option<f64>,
    /// Output weights file (defaults to OUT_DIR/weights.txt, else stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    pub images: Vec<String>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub detections: Option<PathBuf>,
    #[arg(long)]
    pub landmarks: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

/// How a command finished, mapped onto the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Partial,
}

impl Outcome {
    fn from_failures(n: usize) -> Self {
        if n == 0 {
            Outcome::Success
        } else {
            Outcome::Partial
        }
    }
}

pub fn exit_code(result: &anyhow::Result<Outcome>) -> ExitCode {
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(1),
        Err(_) => ExitCode::from(2),
    }
}

/// Settings after merging the config file with global flags.
struct Ctx {
    cfg: PipelineConfig,
}

impl Ctx {
    fn new(cli: &Cli) -> anyhow::Result<Self> {
        let mut cfg = match &cli.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(o) = &cli.out_dir {
            cfg.out_dir = Some(o.clone());
        }
        if let Some(w) = cli.workers {
            cfg.workers = w;
        }
        cfg.emit_annotated |= cli.emit_annotated;
        Ok(Ctx { cfg })
    }

    fn out_dir(&self) -> Option<&Path> {
        self.cfg.out_dir.as_deref()
    }

    fn require_out_dir(&self, what: &str) -> anyhow::Result<&Path> {
        self.out_dir().ok_or_else(|| anyhow!("{what} needs --out-dir (or out_dir in the config)"))
    }

    fn weights(&self, flag: Option<&Path>, tau_flag: Option<f64>) -> anyhow::Result<(AwarenessWeights, GazeConfig)> {
        let path = flag.map(Path::to_path_buf).or_else(|| self.cfg.awareness.weights.clone());
        let (w, mut gaze) = match path {
            Some(p) => load_weights(&p)?,
            None => (AwarenessWeights::PUBLISHED, self.cfg.gaze()?),
        };
        if let Some(t) = tau_flag {
            gaze = GazeConfig::new(t)?;
        }
        Ok((w, gaze))
    }
}

/// Write `text` to `OUT_DIR/name`, or print it when there is no output directory.
fn emit(ctx: &Ctx, name: &str, text: &str) -> anyhow::Result<()> {
    match ctx.out_dir() {
        Some(dir) => write_text(&dir.join(name), text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn manifest_root(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let ctx = Ctx::new(cli)?;
    match &cli.command {
        Command::Anonymize(a) => cmd_anonymize(&ctx, a),
        Command::Augment(a) => cmd_augment(&ctx, a),
        Command::Score(a) => cmd_score(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::TrainWeights(a) => cmd_train_weights(&ctx, a),
        Command::Pipeline(a) => cmd_pipeline(&ctx, a),
    }
}

#[derive(Serialize)]
struct AnonymizeProvenance<'a> {
    image: &'a str,
    output: String,
    kernel_size: usize,
    sigma: f64,
    enlarge: &'a str,
    faces: Vec<WireBox>,
    regions: Vec<WireBox>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn cmd_anonymize(ctx: &Ctx, a: &AnonymizeArgs) -> anyhow::Result<Outcome> {
    let out_dir = ctx.require_out_dir("anonymize")?;
    let mut params = ctx.cfg.blur_params()?;
    if let Some(k) = a.kernel_size {
        params.kernel_size = k;
    }
    if let Some(s) = a.sigma {
        params.sigma = s;
    }
    params = BlurParams::new(params.kernel_size, params.sigma)?;
    let mode = match a.pad_fraction {
        Some(f) => EnlargeMode::PadFractionOfBox(f),
        None => ctx.cfg.enlarge_mode()?,
    };
    let mode_label = match mode {
        EnlargeMode::CoordinateFifth => "coordinate_fifth",
        EnlargeMode::PadFractionOfBox(_) => "pad_fraction",
    };

    let manifest = a.manifest.as_deref().map(load_manifest).transpose()?;
    let root = a.manifest.as_deref().map(manifest_root).unwrap_or_default();
    let faces_file = a.faces.as_deref().map(FileLandmarkProvider::load).transpose()?;
    if faces_file.is_none() && manifest.is_none() {
        bail!("anonymize needs a face source: --faces FILE or --manifest with faces");
    }
    let mut images: Vec<String> = a.images.clone();
    if let Some(m) = &manifest {
        images.extend(m.records.iter().map(|r| r.image.clone()));
    }
    if images.is_empty() {
        bail!("no images given");
    }

    let mut provenance = String::new();
    let mut failures = 0;
    for image in &images {
        let boxes: Vec<BoundingBox> = match &faces_file {
            Some(f) => f.all_faces().find(|(k, _)| k == image).map(|(_, fs)| fs).unwrap_or_default(),
            None => manifest.as_ref().and_then(|m| m.get(image)).and_then(|r| r.faces.clone()).unwrap_or_default(),
        }
        .iter()
        .filter_map(|f| f.face_box)
        .collect();
        let rel = Path::new(image);
        let output = out_dir.join(if rel.is_absolute() { Path::new(rel.file_name().unwrap_or_default()) } else { rel }).with_extension("png");
        let result = (|| -> anyhow::Result<Vec<BoundingBox>> {
            let img = load_image(&resolve(&root, image))?;
            let (w, h) = (img.width() as f64, img.height() as f64);
            let regions = boxes.iter().map(|b| enlarge_box_with(*b, w, h, mode)).collect::<Result<Vec<_>, _>>()?;
            let out = anonymize_image_with(&img, &boxes, &params, mode)?;
            save_png(&out, &output)?;
            Ok(regions)
        })();
        let (regions, error) = match result {
            Ok(r) => (r, None),
            Err(e) => {
                failures += 1;
                log::error!("{image}: {e:#}");
                (Vec::new(), Some(format!("{e:#}")))
            }
        };
        let rec = AnonymizeProvenance {
            image,
            output: output.display().to_string(),
            kernel_size: params.kernel_size,
            sigma: params.sigma,
            enlarge: mode_label,
            faces: boxes.iter().map(box_to_wire).collect(),
            regions: regions.iter().map(box_to_wire).collect(),
            error,
        };
        provenance.push_str(&serde_json::to_string(&rec)?);
        provenance.push('\n');
    }
    write_text(&out_dir.join("anonymize.jsonl"), &provenance)?;
    Ok(Outcome::from_failures(failures))
}

fn cmd_augment(ctx: &Ctx, a: &AugmentArgs) -> anyhow::Result<Outcome> {
    let out_dir = ctx.require_out_dir("augment")?;
    let manifest = load_manifest(&a.manifest)?;
    let ranges = ctx.cfg.ranges()?;
    let per_image = a.per_image.unwrap_or(ctx.cfg.augment.per_image);
    let root = manifest_root(&a.manifest);
    let mut store = FsImageStore { read_root: root.clone(), write_root: out_dir.to_path_buf() };
    let outcome = augment_dataset(&manifest, &ranges, per_image, ctx.cfg.seed, &mut store)?;
    for (image, why) in &outcome.skipped {
        log::error!("skipped {image}: {why}");
    }
    let mut out = outcome.manifest;
    // originals stay where they are; point at them from the output directory
    let same_dir = paths_equal(&root, out_dir);
    if !same_dir {
        for r in &mut out.records {
            match &mut r.provenance {
                None => r.image = rebase_source(&root, &r.image),
                Some(p) => p.source = rebase_source(&root, &p.source),
            }
        }
    }
    let out = DatasetManifest::new(out.records)?;
    write_text(&out_dir.join("manifest.json"), &render_manifest(&out))?;
    eprintln!(
        "{} source records, {} output records, {} skipped",
        manifest.len(),
        out.len(),
        outcome.skipped.len()
    );
    Ok(Outcome::from_failures(outcome.skipped.len()))
}

fn paths_equal(a: &Path, b: &Path) -> bool {
    let canon = |p: &Path| std::fs::canonicalize(if p.as_os_str().is_empty() { Path::new(".") } else { p }).ok();
    match (canon(a), canon(b)) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

fn rebase_source(root: &Path, image: &str) -> String {
    let p = resolve(root, image);
    std::fs::canonicalize(&p).unwrap_or(p).display().to_string()
}

#[derive(Serialize)]
struct ScoreLine<'a> {
    image: &'a str,
    face: usize,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    bbox: Option<WireBox>,
    f_r: f64,
    score: f64,
    aware: bool,
}

fn cmd_score(ctx: &Ctx, a: &ScoreArgs) -> anyhow::Result<Outcome> {
    let (weights, gaze) = ctx.weights(a.weights.as_deref(), a.tau_r_deg)?;
    let lms = FileLandmarkProvider::load(&a.landmarks)?;
    let mut out = String::new();
    for (image, faces) in lms.all_faces() {
        for (i, f) in faces.iter().enumerate() {
            let score = awareness_score(f, &weights, &gaze);
            let line = ScoreLine {
                image,
                face: i,
                bbox: f.face_box.as_ref().map(box_to_wire),
                f_r: rotational_factor(f.head_yaw_deg, &gaze),
                score,
                aware: classify_awareness(score).is_aware(),
            };
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
    }
    emit(ctx, "scores.jsonl", &out)?;
    Ok(Outcome::Success)
}

fn parse_confusion(spec: &str) -> anyhow::Result<(String, ConfusionCounts)> {
    let (label, nums) = match spec.split_once('=') {
        Some((l, n)) => (l.to_string(), n),
        None => (format!("counts {spec}"), spec),
    };
    let v: Vec<u64> = nums
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad --confusion '{spec}'"))?;
    let [tp, tn, fp, fn_] = v[..] else { bail!("--confusion expects four counts TP,TN,FP,FN, got '{spec}'") };
    Ok((label, ConfusionCounts::new(tp, tn, fp, fn_)))
}

/// Score of the person of interest: highest-confidence detection, largest face
/// in its crop.
fn poi_scores(
    image: &str,
    dets: &dyn DetectionProvider,
    lms: &dyn LandmarkProvider,
    weights: &AwarenessWeights,
    gaze: &GazeConfig,
) -> privpas_core::Result<Vec<f64>> {
    let mut found = dets.detect(image)?;
    found.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    let Some(best) = found.first() else { return Ok(Vec::new()) };
    let faces = checked_landmarks(lms, image, &best.bbox)?;
    Ok(select_poi_face(&faces).map(|f| awareness_score(f, weights, gaze)).into_iter().collect())
}

fn cmd_eval(ctx: &Ctx, a: &EvalArgs) -> anyhow::Result<Outcome> {
    let mut report = MetricsReport::default();
    let mut detection_report = None;
    for spec in &a.confusion {
        let (label, c) = parse_confusion(spec)?;
        let m = classification_metrics(&c)?;
        report.classification.push(classification_section(label, &c, &m));
    }
    let manifest = a.manifest.as_deref().map(load_manifest).transpose()?;
    let detections = a
        .detections
        .clone()
        .or_else(|| ctx.cfg.providers.detections.clone())
        .map(|p| FileDetectionProvider::load(&p))
        .transpose()?;
    let landmarks = a
        .landmarks
        .clone()
        .or_else(|| a.landmarks.is_none().then(|| ctx.cfg.providers.landmarks.clone()).flatten())
        .map(|p| FileLandmarkProvider::load(&p))
        .transpose()?;

    if let (Some(m), Some(d)) = (&manifest, &detections) {
        let iou = a.iou_threshold.unwrap_or(ctx.cfg.eval.iou_threshold);
        let interp = if a.eleven_point { Interpolation::ElevenPoint } else { ctx.cfg.interpolation()? };
        let images: Vec<_> = m
            .records
            .iter()
            .map(|r| Ok((d.detect(&r.image)?, r.annotations.clone())))
            .collect::<privpas_core::Result<_>>()?;
        let r = evaluate_detections(&images, iou, interp);
        report.detection = Some(detection_section(&r));
        detection_report = Some(r);
    }

    let wants_awareness = a.aggregate.is_some() || landmarks.is_some();
    if let (true, Some(m)) = (wants_awareness, &manifest) {
        let mode: Aggregation = match &a.aggregate {
            Some(s) => s.parse().map_err(|e: String| anyhow!(e))?,
            None => ctx.cfg.aggregation()?,
        };
        let (weights, gaze) = ctx.weights(a.weights.as_deref(), None)?;
        let mut items = Vec::with_capacity(m.len());
        for r in &m.records {
            let scores = match mode {
                Aggregation::Poi => {
                    let d = detections.as_ref().ok_or_else(|| anyhow!("poi aggregation needs --detections"))?;
                    let l = landmarks.as_ref().ok_or_else(|| anyhow!("poi aggregation needs --landmarks"))?;
                    poi_scores(&r.image, d, l, &weights, &gaze)?
                }
                Aggregation::Min | Aggregation::Avg => {
                    let faces = match &landmarks {
                        Some(l) => l.all_faces().find(|(k, _)| *k == r.image).map(|(_, f)| f).unwrap_or_default(),
                        None => r.faces.clone().unwrap_or_default(),
                    };
                    faces.iter().map(|f| awareness_score(f, &weights, &gaze)).collect()
                }
            };
            items.push((r.awareness_gt, scores));
        }
        let e = awareness_eval(&items, mode)?;
        let mut section = classification_section(
            aggregation_label(mode),
            &e.counts,
            &classification_metrics(&e.counts).unwrap_or(privpas_core::evaluator::ClassificationMetrics {
                precision: None,
                recall: None,
                f1: None,
            }),
        );
        section.excluded = e
            .excluded
            .iter()
            .map(|(i, why)| ExcludedEntry { image: m.records[*i].image.clone(), reason: exclusion_reason(why).into() })
            .collect();
        report.classification.push(section);
    }

    if report.detection.is_none() && report.classification.is_empty() {
        bail!("nothing to evaluate: give --confusion, or --manifest with --detections and/or --landmarks");
    }
    if let Some(dir) = ctx.out_dir() {
        write_text(&dir.join("metrics.json"), &render_json(&report))?;
        if let Some(r) = &detection_report {
            write_text(&dir.join("pr_curves.csv"), &render_pr_csv(r))?;
            if a.plot {
                write_text(&dir.join("pr_curves.svg"), &pr_curves_svg(r))?;
            }
        }
    }
    if a.json {
        print!("{}", render_json(&report));
    } else {
        print!("{}", render_summary(&report));
    }
    Ok(Outcome::Success)
}

fn cmd_train_weights(ctx: &Ctx, a: &TrainArgs) -> anyhow::Result<Outcome> {
    let gaze = match a.tau_r_deg {
        Some(t) => GazeConfig::new(t)?,
        None => ctx.cfg.gaze()?,
    };
    let data = load_features(&a.features, &gaze)?;
    let params = TrainParams { learning_rate: a.learning_rate, iterations: a.iterations, l2: a.l2 };
    let (weights, losses) = train_weights_traced(&data, &params)?;
    let correct = data
        .iter()
        .filter(|(x, y)| classify_awareness(x.score(&weights)).is_aware() == *y)
        .count();
    eprintln!(
        "trained on {} examples: final loss {:.6}, training accuracy {:.3}",
        data.len(),
        losses.last().copied().unwrap_or(f64::NAN),
        correct as f64 / data.len() as f64
    );
    let text = render_weights(&weights, &gaze);
    match (&a.out, ctx.out_dir()) {
        (Some(p), _) => write_text(p, &text)?,
        (None, Some(dir)) => write_text(&dir.join("weights.txt"), &text)?,
        (None, None) => print!("{text}"),
    }
    Ok(Outcome::Success)
}

fn cmd_pipeline(ctx: &Ctx, a: &PipelineArgs) -> anyhow::Result<Outcome> {
    let det_path = a
        .detections
        .clone()
        .or_else(|| ctx.cfg.providers.detections.clone())
        .ok_or_else(|| anyhow!("pipeline needs --detections (or providers.detections)"))?;
    let lm_path = a
        .landmarks
        .clone()
        .or_else(|| ctx.cfg.providers.landmarks.clone())
        .ok_or_else(|| anyhow!("pipeline needs --landmarks (or providers.landmarks)"))?;
    let dets = FileDetectionProvider::load(&det_path)?;
    let lms = FileLandmarkProvider::load(&lm_path)?;
    let (weights, gaze) = ctx.weights(a.weights.as_deref(), None)?;

    let manifest = a.manifest.as_deref().map(load_manifest).transpose()?;
    let root = a.manifest.as_deref().map(manifest_root).unwrap_or_default();
    let mut images = a.images.clone();
    if let Some(m) = &manifest {
        images.extend(m.records.iter().map(|r| r.image.clone()));
    }
    if images.is_empty() {
        bail!("no images given");
    }

    let pipeline = Pipeline { detections: &dets, landmarks: &lms, weights, gaze };
    let mut decisions = pipeline.run(&images, ctx.cfg.workers);
    if let Some(m) = &manifest {
        for d in &mut decisions {
            d.sensitive = m.get(&d.image).map(|r| r.annotations.iter().any(|a| a.sensitive));
        }
    }
    let mut failures = decisions.iter().filter(|d| d.error.is_some()).count();

    if ctx.cfg.emit_annotated {
        let dir = ctx.require_out_dir("--emit-annotated")?.join("annotated");
        for d in decisions.iter().filter(|d| d.error.is_none()) {
            let rel = Path::new(&d.image);
            let name = rel.file_name().map(PathBuf::from).unwrap_or_else(|| PathBuf::from(&d.image));
            let result = load_image(&resolve(&root, &d.image)).and_then(|img| save_png(&annotate(&img, d), &dir.join(name).with_extension("png")));
            if let Err(e) = result {
                log::error!("annotating {}: {e}", d.image);
                failures += 1;
            }
        }
    }
    emit(ctx, "decisions.jsonl", &render_decisions(&decisions))?;
    Ok(Outcome::from_failures(failures))
}
