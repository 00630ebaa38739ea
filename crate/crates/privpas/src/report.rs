//! Machine-readable metric reports (full precision) and a terse text summary
//! (three decimals).

use std::fmt::Write as _;

use privpas_core::evaluator::{ClassificationMetrics, DetectionReport, Exclusion, Interpolation};
use privpas_core::{Aggregation, ConfusionCounts};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ClassEntry {
    pub class: String,
    pub n_truths: usize,
    pub n_detections: usize,
    pub true_positives: usize,
    pub ap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionSection {
    pub iou_threshold: f64,
    pub interpolation: String,
    pub map: Option<f64>,
    pub classes: Vec<ClassEntry>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationSection {
    pub label: String,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<ExcludedEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcludedEntry {
    pub image: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub classification: Vec<ClassificationSection>,
}

pub fn detection_section(r: &DetectionReport) -> DetectionSection {
    DetectionSection {
        iou_threshold: r.iou_threshold,
        interpolation: match r.interpolation {
            Interpolation::AllPoint => "all_point".into(),
            Interpolation::ElevenPoint => "eleven_point".into(),
        },
        map: r.map,
        classes: r
            .classes
            .iter()
            .map(|c| ClassEntry {
                class: c.class.label().into(),
                n_truths: c.n_truths,
                n_detections: c.n_detections,
                true_positives: c.true_positives,
                ap: c.ap,
            })
            .collect(),
        warnings: r
            .classes
            .iter()
            .filter(|c| c.ap.is_none())
            .map(|c| format!("class {} has no ground truth; excluded from mAP", c.class.label()))
            .collect(),
    }
}

pub fn exclusion_reason(e: &Exclusion) -> &'static str {
    match e {
        Exclusion::MissingGroundTruth => "missing awareness ground truth",
        Exclusion::NoScores => "no face scores",
        Exclusion::Ambiguous => "more than one score in poi mode",
    }
}

pub fn classification_section(label: impl Into<String>, c: &ConfusionCounts, m: &ClassificationMetrics) -> ClassificationSection {
    ClassificationSection {
        label: label.into(),
        tp: c.tp,
        tn: c.tn,
        fp: c.fp,
        fn_: c.fn_,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        excluded: Vec::new(),
    }
}

pub fn aggregation_label(a: Aggregation) -> String {
    format!("awareness/{}", a.label())
}

pub fn render_json(r: &MetricsReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

/// `class,recall,precision,threshold` rows for every class with ground truth.
pub fn render_pr_csv(r: &DetectionReport) -> String {
    let mut s = String::from("class,recall,precision,threshold\n");
    for c in r.classes.iter().filter(|c| c.ap.is_some()) {
        for p in &c.curve.points {
            let _ = writeln!(s, "{},{},{},{}", c.class.label(), p.recall, p.precision, p.threshold);
        }
    }
    s
}

fn opt3(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{v:.3}"))
}

pub fn render_summary(r: &MetricsReport) -> String {
    let mut s = String::new();
    if let Some(d) = &r.detection {
        for c in &d.classes {
            let _ = writeln!(s, "AP {:<22} {}  (truths {}, detections {})", c.class, opt3(c.ap), c.n_truths, c.n_detections);
        }
        let _ = writeln!(s, "mAP@{} {}", d.iou_threshold, opt3(d.map));
        for w in &d.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
    }
    for c in &r.classification {
        let _ = writeln!(
            s,
            "{}: TP {} TN {} FP {} FN {}  precision {}  recall {}  F1 {}",
            c.label,
            c.tp,
            c.tn,
            c.fp,
            c.fn_,
            opt3(c.precision),
            opt3(c.recall),
            opt3(c.f1)
        );
        for e in &c.excluded {
            let _ = writeln!(s, "  excluded {}: {}", e.image, e.reason);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use privpas_core::classification_metrics;

    #[test]
    fn summary_rounds_to_three_decimals() {
        let c = ConfusionCounts::new(189, 172, 78, 61);
        let m = classification_metrics(&c).unwrap();
        let r = MetricsReport { detection: None, classification: vec![classification_section("objDetection", &c, &m)] };
        let s = render_summary(&r);
        assert!(s.contains("precision 0.708  recall 0.756  F1 0.731"), "{s}");
        let json = render_json(&r);
        assert!(json.contains("0.7078651685393258"), "{json}");
        assert!(json.contains("\"fn\": 61"));
    }
}
