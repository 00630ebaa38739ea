//! JSON Lines interchange files for detections and face landmarks.
//!
//! Detections: `{"image": path, "detections": [{"class", "box": [x1,y1,x2,y2], "confidence"}]}`
//! Landmarks: `{"image": path, "crop"?: [x1,y1,x2,y2], "faces": [{"h_y_deg", "p_eye_left", "p_eye_right", "p_smile", "box"?}]}`

use std::collections::BTreeMap;
use std::path::Path;

use privpas_core::{BoundingBox, Detection, FaceObservation};
use serde::{Deserialize, Serialize};

use super::{box_from_wire, box_to_wire, class_from_wire, WireBox, WireFace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireDetection {
    pub class: String,
    #[serde(rename = "box")]
    pub bbox: WireBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionLine {
    pub image: String,
    pub detections: Vec<WireDetection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkLine {
    pub image: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop: Option<WireBox>,
    pub faces: Vec<WireFace>,
}

/// Faces stored for one image, optionally pinned to an exact crop.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkEntry {
    pub crop: Option<BoundingBox>,
    pub faces: Vec<FaceObservation>,
}

fn lines<'a, T: for<'de> Deserialize<'de>>(text: &'a str, path: &Path) -> impl Iterator<Item = Result<(usize, T)>> + 'a {
    let path = path.to_path_buf();
    text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(move |(i, l)| {
        serde_json::from_str(l).map(|v| (i + 1, v)).map_err(|e| Error::parse(&path, i + 1, e))
    })
}

pub fn parse_detections(text: &str, path: &Path) -> Result<BTreeMap<String, Vec<Detection>>> {
    let mut out = BTreeMap::new();
    for item in lines::<DetectionLine>(text, path) {
        let (line, rec) = item?;
        let dets = rec
            .detections
            .into_iter()
            .map(|d| Detection::new(box_from_wire(d.bbox)?, class_from_wire(&d.class)?, d.confidence))
            .collect::<privpas_core::Result<Vec<_>>>()
            .map_err(|e| Error::parse(path, line, e))?;
        if out.insert(rec.image.clone(), dets).is_some() {
            return Err(Error::parse(path, line, format!("duplicate image '{}'", rec.image)));
        }
    }
    Ok(out)
}

pub fn render_detections(map: &BTreeMap<String, Vec<Detection>>) -> String {
    let mut s = String::new();
    for (image, dets) in map {
        let line = DetectionLine {
            image: image.clone(),
            detections: dets
                .iter()
                .map(|d| WireDetection { class: d.class.label().into(), bbox: box_to_wire(&d.bbox), confidence: d.confidence })
                .collect(),
        };
        s.push_str(&serde_json::to_string(&line).expect("serializable"));
        s.push('\n');
    }
    s
}

pub fn parse_landmarks(text: &str, path: &Path) -> Result<BTreeMap<String, Vec<LandmarkEntry>>> {
    let mut out: BTreeMap<String, Vec<LandmarkEntry>> = BTreeMap::new();
    for item in lines::<LandmarkLine>(text, path) {
        let (line, rec) = item?;
        let entry = (|| -> privpas_core::Result<LandmarkEntry> {
            Ok(LandmarkEntry {
                crop: rec.crop.map(box_from_wire).transpose()?,
                faces: rec.faces.into_iter().map(WireFace::into_observation).collect::<privpas_core::Result<_>>()?,
            })
        })()
        .map_err(|e| Error::parse(path, line, e))?;
        out.entry(rec.image).or_default().push(entry);
    }
    Ok(out)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detections_parse() {
        let text = r#"{"image": "a.png", "detections": [{"class": "uses_crutches", "box": [1,2,3,4], "confidence": 0.9}]}

{"image": "b.png", "detections": []}"#;
        let m = parse_detections(text, Path::new("d.jsonl")).unwrap();
        assert_eq!(m["a.png"].len(), 1);
        assert!(m["b.png"].is_empty());
        let again = parse_detections(&render_detections(&m), Path::new("d.jsonl")).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn detection_errors_carry_line_numbers() {
        let text = "{\"image\": \"a.png\", \"detections\": []}\n{\"image\": \"b.png\", \"detections\": [{\"class\": \"uses_crutches\", \"box\": [1,2,3,4], \"confidence\": 1.2}]}";
        let err = parse_detections(text, Path::new("d.jsonl")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_detections("{not json", Path::new("d.jsonl")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let dup = "{\"image\": \"a.png\", \"detections\": []}\n{\"image\": \"a.png\", \"detections\": []}";
        assert!(matches!(parse_detections(dup, Path::new("d.jsonl")), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn landmarks_parse() {
        let text = r#"{"image": "a.png", "crop": [0,0,50,50], "faces": [{"h_y_deg": -1.165, "p_eye_left": 0.996, "p_eye_right": 0.994, "p_smile": 0.182}]}
{"image": "a.png", "faces": [{"h_y_deg": 3, "p_eye_left": 0.5, "p_eye_right": 0.5, "p_smile": 0.5, "box": [60,60,70,70]}]}"#;
        let m = parse_landmarks(text, Path::new("l.jsonl")).unwrap();
        assert_eq!(m["a.png"].len(), 2);
        assert!(m["a.png"][0].crop.is_some());
        let missing = r#"{"image": "a.png", "faces": [{"h_y_deg": 3, "p_eye_left": 0.5, "p_smile": 0.5}]}"#;
        assert!(parse_landmarks(missing, Path::new("l.jsonl")).is_err());
    }
}
