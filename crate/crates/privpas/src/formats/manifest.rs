//! Dataset manifest: a JSON object `{"records": [...]}`.
//!
//! Record schema:
//! `{"image", "split": "train"|"val", "annotations": [{"class", "box", "sensitive"}],
//!   "faces"?: [...], "awareness_gt"?: bool, "provenance"?: {...}}`.

use std::path::Path;

use privpas_core::augmentor::TRANSFORM_ORDER;
use privpas_core::{
    Annotation, AugmentationSample, DatasetManifest, ManifestRecord, Provenance, Split,
};
use serde::{Deserialize, Serialize};

use super::{box_from_wire, box_to_wire, class_from_wire, WireBox, WireFace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WireSplit {
    #[default]
    Train,
    Val,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireAnnotation {
    pub class: String,
    #[serde(rename = "box")]
    pub bbox: WireBox,
    #[serde(default)]
    pub sensitive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSample {
    pub rotation_deg: f64,
    pub brightness: f64,
    pub scale: f64,
    pub translate_x: f64,
    pub translate_y: f64,
    pub flip_h: bool,
    pub flip_v: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hue_deg: Option<f64>,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireProvenance {
    pub source: String,
    pub index: usize,
    /// Transform order the sample was applied in.
    pub order: String,
    pub sample: WireSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRecord {
    pub image: String,
    #[serde(default)]
    pub split: WireSplit,
    #[serde(default)]
    pub annotations: Vec<WireAnnotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<WireFace>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub awareness_gt: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<WireProvenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireManifest {
    pub records: Vec<WireRecord>,
}

fn sample_to_wire(s: &AugmentationSample) -> WireSample {
    WireSample {
        rotation_deg: s.rotation_deg,
        brightness: s.brightness,
        scale: s.scale,
        translate_x: s.translate_x,
        translate_y: s.translate_y,
        flip_h: s.flip_h,
        flip_v: s.flip_v,
        contrast: s.contrast,
        saturation: s.saturation,
        hue_deg: s.hue_deg,
        rng_seed: s.rng_seed,
    }
}

fn sample_from_wire(s: WireSample) -> AugmentationSample {
    AugmentationSample {
        rotation_deg: s.rotation_deg,
        brightness: s.brightness,
        scale: s.scale,
        translate_x: s.translate_x,
        translate_y: s.translate_y,
        flip_h: s.flip_h,
        flip_v: s.flip_v,
        contrast: s.contrast,
        saturation: s.saturation,
        hue_deg: s.hue_deg,
        rng_seed: s.rng_seed,
    }
}

fn record_from_wire(r: WireRecord) -> privpas_core::Result<ManifestRecord> {
    let annotations = r
        .annotations
        .into_iter()
        .map(|a| Annotation::new(box_from_wire(a.bbox)?, class_from_wire(&a.class)?, a.sensitive))
        .collect::<privpas_core::Result<Vec<_>>>()?;
    let faces = r
        .faces
        .map(|fs| fs.into_iter().map(WireFace::into_observation).collect::<privpas_core::Result<Vec<_>>>())
        .transpose()?;
    Ok(ManifestRecord {
        image: r.image,
        split: match r.split {
            WireSplit::Train => Split::Train,
            WireSplit::Val => Split::Val,
        },
        annotations,
        faces,
        awareness_gt: r.awareness_gt,
        provenance: r.provenance.map(|p| Provenance {
            source: p.source,
            index: p.index,
            sample: sample_from_wire(p.sample),
        }),
    })
}

pub fn record_to_wire(r: &ManifestRecord) -> WireRecord {
    WireRecord {
        image: r.image.clone(),
        split: match r.split {
            Split::Train => WireSplit::Train,
            Split::Val => WireSplit::Val,
        },
        annotations: r
            .annotations
            .iter()
            .map(|a| WireAnnotation { class: a.class.label().into(), bbox: box_to_wire(&a.bbox), sensitive: a.sensitive })
            .collect(),
        faces: r.faces.as_ref().map(|fs| fs.iter().map(WireFace::from_observation).collect()),
        awareness_gt: r.awareness_gt,
        provenance: r.provenance.as_ref().map(|p| WireProvenance {
            source: p.source.clone(),
            index: p.index,
            order: TRANSFORM_ORDER.into(),
            sample: sample_to_wire(&p.sample),
        }),
    }
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<DatasetManifest> {
    let wire: WireManifest = serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e))?;
    let records = wire
        .records
        .into_iter()
        .enumerate()
        .map(|(i, r)| record_from_wire(r).map_err(|e| Error::format(path, format!("record {i}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    DatasetManifest::new(records).map_err(|e| Error::format(path, e))
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path)
}

/// Pretty-printed JSON with a trailing newline. Floats use the shortest
/// representation that reads back to the same value.
pub fn render_manifest(m: &DatasetManifest) -> String {
    let wire = WireManifest { records: m.records.iter().map(record_to_wire).collect() };
    let mut s = serde_json::to_string_pretty(&wire).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn save_manifest(m: &DatasetManifest, path: &Path) -> Result<()> {
    crate::write_text(path, &render_manifest(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{"records": [
        {"image": "a.png", "split": "train",
         "annotations": [{"class": "uses_wheelchair", "box": [1, 2, 30, 40], "sensitive": true}],
         "awareness_gt": false,
         "faces": [{"h_y_deg": -12.069, "p_eye_left": 0.195, "p_eye_right": 0.823, "p_smile": 0.997, "box": [5, 5, 15, 15]}]},
        {"image": "b.jpg", "split": "val", "annotations": []}
    ]}"#;

    #[test]
    fn parse_and_render() {
        let m = parse_manifest(SAMPLE, Path::new("m.json")).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.records[0].annotations[0].class, privpas_core::AccessibilityClass::UsesWheelchair);
        assert_eq!(m.records[0].awareness_gt, Some(false));
        assert_eq!(m.records[1].split, Split::Val);
        let again = parse_manifest(&render_manifest(&m), Path::new("m.json")).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn bad_records_rejected() {
        let bad_class = r#"{"records": [{"image": "a.png", "annotations": [{"class": "bike", "box": [0,0,1,1]}]}]}"#;
        let err = parse_manifest(bad_class, Path::new("m.json")).unwrap_err().to_string();
        assert!(err.contains("record 0") && err.contains("bike"), "{err}");
        let dup = r#"{"records": [{"image": "a.png"}, {"image": "a.png"}]}"#;
        assert!(parse_manifest(dup, Path::new("m.json")).is_err());
        let missing_face_field = r#"{"records": [{"image": "a.png", "faces": [{"h_y_deg": 1.0, "p_eye_left": 0.5, "p_eye_right": 0.5}]}]}"#;
        assert!(parse_manifest(missing_face_field, Path::new("m.json")).is_err());
        let bad_split = r#"{"records": [{"image": "a.png", "split": "test"}]}"#;
        assert!(parse_manifest(bad_split, Path::new("m.json")).is_err());
    }
}
