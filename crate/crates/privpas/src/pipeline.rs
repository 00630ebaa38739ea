//! Detect, crop, read landmarks, score, cue.
//!
//! For each image the detection provider yields persons of interest (POIs).
//! Each POI box is handed to the landmark provider as the crop; the largest
//! face in the crop is scored and classified. A POI raises a cue when it is
//! not aware, and an image raises a cue when any of its POIs does. A POI
//! whose crop yields no face has unknown awareness and is treated as not
//! aware.

use std::sync::atomic::{AtomicUsize, Ordering};

use privpas_core::providers::{checked_landmarks, select_poi_face, DetectionProvider, LandmarkProvider};
use privpas_core::{
    awareness_score, classify_awareness, rotational_factor, Awareness, AwarenessWeights, Detection, GazeConfig,
};
use serde::Serialize;

use crate::formats::{box_to_wire, WireBox};

#[derive(Debug, Clone, PartialEq)]
pub struct PoiDecision {
    pub detection: Detection,
    pub face_found: bool,
    pub rotational_factor: Option<f64>,
    pub score: Option<f64>,
    pub awareness: Awareness,
    pub cue: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CueDecision {
    pub image: String,
    /// Set when a provider failed for this image.
    pub error: Option<String>,
    pub pois: Vec<PoiDecision>,
    pub cue: bool,
    /// Whether the ground-truth record marks any annotation sensitive (only
    /// known when running from a manifest). Reported, never used for the cue.
    pub sensitive: Option<bool>,
}

impl CueDecision {
    fn failed(image: &str, err: impl ToString) -> Self {
        CueDecision { image: image.into(), error: Some(err.to_string()), pois: Vec::new(), cue: false, sensitive: None }
    }
}

pub struct Pipeline<'a> {
    pub detections: &'a dyn DetectionProvider,
    pub landmarks: &'a dyn LandmarkProvider,
    pub weights: AwarenessWeights,
    pub gaze: GazeConfig,
}

impl Pipeline<'_> {
    pub fn decide(&self, image: &str) -> CueDecision {
        let dets = match self.detections.detect(image) {
            Ok(d) => d,
            Err(e) => return CueDecision::failed(image, e),
        };
        let mut pois = Vec::with_capacity(dets.len());
        for det in dets {
            let faces = match checked_landmarks(self.landmarks, image, &det.bbox) {
                Ok(f) => f,
                Err(e) => return CueDecision::failed(image, e),
            };
            let poi = match select_poi_face(&faces) {
                Some(face) => {
                    let score = awareness_score(face, &self.weights, &self.gaze);
                    let awareness = classify_awareness(score);
                    PoiDecision {
                        detection: det,
                        face_found: true,
                        rotational_factor: Some(rotational_factor(face.head_yaw_deg, &self.gaze)),
                        score: Some(score),
                        awareness,
                        cue: awareness == Awareness::NotAware,
                    }
                }
                None => PoiDecision {
                    detection: det,
                    face_found: false,
                    rotational_factor: None,
                    score: None,
                    awareness: Awareness::NotAware,
                    cue: true,
                },
            };
            pois.push(poi);
        }
        let cue = pois.iter().any(|p| p.cue);
        CueDecision { image: image.into(), error: None, pois, cue, sensitive: None }
    }

    /// Decide every image with up to `workers` threads; output keeps input order.
    pub fn run(&self, images: &[String], workers: usize) -> Vec<CueDecision> {
        let workers = workers.clamp(1, images.len().max(1));
        if workers == 1 {
            return images.iter().map(|i| self.decide(i)).collect();
        }
        let next = AtomicUsize::new(0);
        let mut indexed: Vec<(usize, CueDecision)> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut local = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= images.len() {
                                break local;
                            }
                            local.push((i, self.decide(&images[i])));
                        }
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("pipeline worker panicked")).collect()
        });
        indexed.sort_by_key(|(i, _)| *i);
        indexed.into_iter().map(|(_, d)| d).collect()
    }
}

#[derive(Serialize)]
struct WirePoi<'a> {
    class: &'a str,
    #[serde(rename = "box")]
    bbox: WireBox,
    confidence: f64,
    face_found: bool,
    f_r: Option<f64>,
    score: Option<f64>,
    aware: bool,
    cue: bool,
}

#[derive(Serialize)]
struct WireDecision<'a> {
    image: &'a str,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    pois: Vec<WirePoi<'a>>,
    cue: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sensitive: Option<bool>,
}

/// One JSON object per line, in input order.
pub fn render_decisions(decisions: &[CueDecision]) -> String {
    let mut out = String::new();
    for d in decisions {
        let wire = WireDecision {
            image: &d.image,
            status: if d.error.is_some() { "error" } else { "ok" },
            error: d.error.as_deref(),
            pois: d
                .pois
                .iter()
                .map(|p| WirePoi {
                    class: p.detection.class.label(),
                    bbox: box_to_wire(&p.detection.bbox),
                    confidence: p.detection.confidence,
                    face_found: p.face_found,
                    f_r: p.rotational_factor,
                    score: p.score,
                    aware: p.awareness.is_aware(),
                    cue: p.cue,
                })
                .collect(),
            cue: d.cue,
            sensitive: d.sensitive,
        };
        out.push_str(&serde_json::to_string(&wire).expect("decision serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use privpas_core::{AccessibilityClass, BoundingBox, FaceObservation, StubDetectionProvider, StubLandmarkProvider};

    fn setup() -> (StubDetectionProvider, StubLandmarkProvider) {
        let b = BoundingBox::new(10.0, 10.0, 110.0, 210.0).unwrap();
        let mut dets = StubDetectionProvider::new();
        let mut lms = StubLandmarkProvider::new();
        dets.insert("aware.png", vec![Detection::new(b, AccessibilityClass::UsesCrutches, 0.9).unwrap()]);
        lms.insert("aware.png", b, vec![FaceObservation::new(-1.165, 0.996, 0.994, 0.182, None).unwrap()]);
        dets.insert("unaware.png", vec![Detection::new(b, AccessibilityClass::UsesWheelchair, 0.8).unwrap()]);
        lms.insert("unaware.png", b, vec![FaceObservation::new(-12.069, 0.195, 0.823, 0.997, None).unwrap()]);
        dets.insert("noface.png", vec![Detection::new(b, AccessibilityClass::StructurallyImpaired, 0.7).unwrap()]);
        dets.insert("empty.png", vec![]);
        (dets, lms)
    }

    #[test]
    fn cue_rules() {
        let (d, l) = setup();
        let p = Pipeline { detections: &d, landmarks: &l, weights: AwarenessWeights::PUBLISHED, gaze: GazeConfig::default() };
        let aware = p.decide("aware.png");
        assert!(!aware.cue);
        assert!((aware.pois[0].score.unwrap() - 0.3397).abs() < 5e-4);
        let unaware = p.decide("unaware.png");
        assert!(unaware.cue);
        assert!((unaware.pois[0].score.unwrap() - -0.6609).abs() < 5e-4);
        let empty = p.decide("empty.png");
        assert!(!empty.cue && empty.pois.is_empty());
        let noface = p.decide("noface.png");
        assert!(noface.cue && !noface.pois[0].face_found);
    }

    #[test]
    fn parallel_matches_sequential() {
        let (d, l) = setup();
        let p = Pipeline { detections: &d, landmarks: &l, weights: AwarenessWeights::PUBLISHED, gaze: GazeConfig::default() };
        let images: Vec<String> =
            (0..40).map(|i| ["aware.png", "unaware.png", "noface.png", "empty.png", "x.png"][i % 5].to_string()).collect();
        let seq = render_decisions(&p.run(&images, 1));
        assert_eq!(render_decisions(&p.run(&images, 4)), seq);
    }
}
