//! Detection metrics (greedy IoU matching, PR curves, AP, mAP) and binary
//! classification metrics from confusion counts.

use alloc::vec;
use alloc::vec::Vec;

use crate::awareness::{aggregate_scores, classify_awareness, Aggregation};
use crate::bbox::iou;
use crate::error::{Error, Result};
use crate::model::{AccessibilityClass, Annotation, Detection};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
        }
    }
}

/// `None` marks a metric whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn classification_metrics(c: &ConfusionCounts) -> Result<ClassificationMetrics> {
    if c.total() == 0 {
        return Err(Error::NoData);
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    Ok(ClassificationMetrics { precision, recall, f1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Per detection, in input order.
    pub detection_tp: Vec<bool>,
    /// Truth index matched by each detection.
    pub matched_truth: Vec<Option<usize>>,
    pub truth_matched: Vec<bool>,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.detection_tp.iter().filter(|t| **t).count()
    }
}

/// Indices of `dets` by descending confidence; equal confidences keep input order.
fn confidence_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.total_cmp(&dets[a].confidence));
    order
}

/// Greedy matching in descending confidence. Each detection takes the
/// unmatched same-class truth with the highest IoU at or above the
/// threshold; IoU ties go to the lower truth index. A detection whose best
/// truth is already taken is a false positive.
pub fn match_detections(dets: &[Detection], truths: &[Annotation], iou_threshold: f64) -> MatchResult {
    let mut detection_tp = vec![false; dets.len()];
    let mut matched_truth = vec![None; dets.len()];
    let mut truth_matched = vec![false; truths.len()];
    for di in confidence_order(dets) {
        let d = &dets[di];
        let mut best: Option<(usize, f64)> = None;
        for (ti, t) in truths.iter().enumerate() {
            if truth_matched[ti] || t.class != d.class {
                continue;
            }
            let v = iou(&d.bbox, &t.bbox);
            if v >= iou_threshold && best.is_none_or(|(_, b)| v > b) {
                best = Some((ti, v));
            }
        }
        if let Some((ti, _)) = best {
            truth_matched[ti] = true;
            detection_tp[di] = true;
            matched_truth[di] = Some(ti);
        }
    }
    MatchResult { detection_tp, matched_truth, truth_matched }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Area under the monotone precision envelope.
    #[default]
    AllPoint,
    /// Mean of the envelope sampled at recall 0, 0.1, ..., 1.
    ElevenPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    /// Confidence of the detection that produced this point.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrCurve {
    /// Recall is nondecreasing along the list.
    pub points: Vec<PrPoint>,
}

/// Precision/recall after each detection, highest confidence first.
pub fn pr_curve(scored: &[(f64, bool)], n_truths: usize) -> PrCurve {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let points = order
        .into_iter()
        .map(|i| {
            let (conf, hit) = scored[i];
            if hit {
                tp += 1;
            } else {
                fp += 1;
            }
            PrPoint {
                recall: if n_truths == 0 { 0.0 } else { tp as f64 / n_truths as f64 },
                precision: tp as f64 / (tp + fp) as f64,
                threshold: conf,
            }
        })
        .collect();
    PrCurve { points }
}

/// Average precision of one class from `(confidence, is_true_positive)` pairs.
pub fn average_precision(scored: &[(f64, bool)], n_truths: usize, method: Interpolation) -> Result<(f64, PrCurve)> {
    if n_truths == 0 {
        return Err(Error::NoData);
    }
    let curve = pr_curve(scored, n_truths);
    let ap = match method {
        Interpolation::AllPoint => {
            let mut rec = Vec::with_capacity(curve.points.len() + 2);
            let mut pre = Vec::with_capacity(curve.points.len() + 2);
            rec.push(0.0);
            pre.push(0.0);
            for p in &curve.points {
                rec.push(p.recall);
                pre.push(p.precision);
            }
            rec.push(1.0);
            pre.push(0.0);
            for i in (0..pre.len() - 1).rev() {
                pre[i] = pre[i].max(pre[i + 1]);
            }
            (0..rec.len() - 1).map(|i| (rec[i + 1] - rec[i]) * pre[i + 1]).sum()
        }
        Interpolation::ElevenPoint => {
            (0..=10)
                .map(|k| {
                    let t = k as f64 / 10.0;
                    curve.points.iter().filter(|p| p.recall >= t).map(|p| p.precision).fold(0.0, f64::max)
                })
                .sum::<f64>()
                / 11.0
        }
    };
    Ok((ap, curve))
}

/// Unweighted mean of the defined per-class APs.
pub fn mean_ap(aps: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = aps.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class: AccessibilityClass,
    pub n_truths: usize,
    pub n_detections: usize,
    pub true_positives: usize,
    /// `None` when the class has no ground truth; such classes are left out of mAP.
    pub ap: Option<f64>,
    pub curve: PrCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub iou_threshold: f64,
    pub interpolation: Interpolation,
    pub classes: Vec<ClassReport>,
    pub map: Option<f64>,
}

/// Match every image independently, pool the flags per class, and compute AP
/// and mAP. `images` pairs each image's detections with its ground truth.
pub fn evaluate_detections(
    images: &[(Vec<Detection>, Vec<Annotation>)],
    iou_threshold: f64,
    interpolation: Interpolation,
) -> DetectionReport {
    let mut scored: [Vec<(f64, bool)>; 3] = Default::default();
    let mut truths = [0usize; 3];
    for (dets, gts) in images {
        let m = match_detections(dets, gts, iou_threshold);
        for (d, hit) in dets.iter().zip(&m.detection_tp) {
            scored[d.class.index()].push((d.confidence, *hit));
        }
        for g in gts {
            truths[g.class.index()] += 1;
        }
    }
    let classes: Vec<ClassReport> = AccessibilityClass::ALL
        .into_iter()
        .map(|class| {
            let i = class.index();
            let (ap, curve) = match average_precision(&scored[i], truths[i], interpolation) {
                Ok((ap, curve)) => (Some(ap), curve),
                Err(_) => (None, pr_curve(&scored[i], 0)),
            };
            ClassReport {
                class,
                n_truths: truths[i],
                n_detections: scored[i].len(),
                true_positives: scored[i].iter().filter(|(_, t)| *t).count(),
                ap,
                curve,
            }
        })
        .collect();
    let aps: Vec<Option<f64>> = classes.iter().map(|c| c.ap).collect();
    DetectionReport { iou_threshold, interpolation, map: mean_ap(&aps), classes }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exclusion {
    MissingGroundTruth,
    NoScores,
    /// POI mode received more than one score.
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AwarenessEval {
    pub counts: ConfusionCounts,
    /// `(record index, reason)`.
    pub excluded: Vec<(usize, Exclusion)>,
}

/// Tally awareness predictions against ground truth. Each item is a record's
/// ground truth and its per-face scores; the scores are aggregated with `mode`
/// and classified at 0.
pub fn awareness_eval(items: &[(Option<bool>, Vec<f64>)], mode: Aggregation) -> Result<AwarenessEval> {
    if items.is_empty() {
        return Err(Error::NoData);
    }
    let mut counts = ConfusionCounts::default();
    let mut excluded = Vec::new();
    for (i, (gt, scores)) in items.iter().enumerate() {
        let Some(actual) = gt else {
            excluded.push((i, Exclusion::MissingGroundTruth));
            continue;
        };
        match aggregate_scores(scores, mode) {
            Ok(score) => counts.record(classify_awareness(score).is_aware(), *actual),
            Err(Error::PoiArity(_)) => excluded.push((i, Exclusion::Ambiguous)),
            Err(_) => excluded.push((i, Exclusion::NoScores)),
        }
    }
    Ok(AwarenessEval { counts, excluded })
}
