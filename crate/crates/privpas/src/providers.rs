//! File-backed providers replaying stored detector and landmark outputs.

use std::collections::BTreeMap;
use std::path::Path;

use privpas_core::providers::{DetectionProvider, LandmarkProvider};
use privpas_core::{BoundingBox, Detection, FaceObservation};

use crate::error::Result;
use crate::formats::jsonl::{parse_detections, parse_landmarks, read_text, LandmarkEntry};

/// Replays a detections JSON Lines file verbatim.
#[derive(Debug, Clone, Default)]
pub struct FileDetectionProvider {
    table: BTreeMap<String, Vec<Detection>>,
}

impl FileDetectionProvider {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(FileDetectionProvider { table: parse_detections(&read_text(path)?, path)? })
    }

    pub fn from_table(table: BTreeMap<String, Vec<Detection>>) -> Self {
        FileDetectionProvider { table }
    }

    pub fn images(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }
}

impl DetectionProvider for FileDetectionProvider {
    fn detect(&self, image: &str) -> privpas_core::Result<Vec<Detection>> {
        match self.table.get(image) {
            Some(d) => Ok(d.clone()),
            None => {
                log::warn!("no stored detections for '{image}'");
                Ok(Vec::new())
            }
        }
    }
}

/// Replays a landmarks JSON Lines file.
///
/// Lines carrying a `crop` answer only that exact crop. Lines without one
/// answer any crop: faces whose box lies inside the crop are returned, and
/// faces without a box are always returned.
#[derive(Debug, Clone, Default)]
pub struct FileLandmarkProvider {
    table: BTreeMap<String, Vec<LandmarkEntry>>,
}

impl FileLandmarkProvider {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(FileLandmarkProvider { table: parse_landmarks(&read_text(path)?, path)? })
    }

    /// All stored faces per image, ignoring crops.
    pub fn all_faces(&self) -> impl Iterator<Item = (&str, Vec<FaceObservation>)> {
        self.table
            .iter()
            .map(|(k, entries)| (k.as_str(), entries.iter().flat_map(|e| e.faces.iter().copied()).collect()))
    }
}

fn same_box(a: &BoundingBox, b: &BoundingBox) -> bool {
    a.x1.to_bits() == b.x1.to_bits()
        && a.y1.to_bits() == b.y1.to_bits()
        && a.x2.to_bits() == b.x2.to_bits()
        && a.y2.to_bits() == b.y2.to_bits()
}

impl LandmarkProvider for FileLandmarkProvider {
    fn landmarks(&self, image: &str, crop: &BoundingBox) -> privpas_core::Result<Vec<FaceObservation>> {
        let Some(entries) = self.table.get(image) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for e in entries {
            match &e.crop {
                Some(c) if same_box(c, crop) => out.extend(e.faces.iter().copied()),
                Some(_) => {}
                None => out.extend(e.faces.iter().filter(|f| f.face_box.is_none_or(|b| crop.contains(&b))).copied()),
            }
        }
        Ok(out)
    }
}

#[cfg(feature = "exec-providers")]
pub mod exec {
    //! Adapters that run an external inference program per query.
    //!
    //! Detection: `program [args..] <image>` must print one detections line.
    //! Landmarks: `program [args..] <image> x1 y1 x2 y2` must print one
    //! landmarks line.

    use std::path::Path;
    use std::process::Command;

    use privpas_core::providers::{DetectionProvider, LandmarkProvider};
    use privpas_core::{BoundingBox, Detection, FaceObservation};

    use crate::formats::jsonl::{parse_detections, parse_landmarks};

    #[derive(Debug, Clone)]
    pub struct ExecProvider {
        pub program: String,
        pub args: Vec<String>,
    }

    impl ExecProvider {
        fn run(&self, extra: &[String]) -> privpas_core::Result<String> {
            let out = Command::new(&self.program)
                .args(&self.args)
                .args(extra)
                .output()
                .map_err(|e| privpas_core::Error::Provider(e.to_string()))?;
            if !out.status.success() {
                return Err(privpas_core::Error::Provider(format!("{} exited with {}", self.program, out.status)));
            }
            String::from_utf8(out.stdout).map_err(|e| privpas_core::Error::Provider(e.to_string()))
        }
    }

    impl DetectionProvider for ExecProvider {
        fn detect(&self, image: &str) -> privpas_core::Result<Vec<Detection>> {
            let text = self.run(&[image.to_string()])?;
            let mut map = parse_detections(&text, Path::new(&self.program))
                .map_err(|e| privpas_core::Error::Provider(e.to_string()))?;
            Ok(map.remove(image).unwrap_or_default())
        }
    }

    impl LandmarkProvider for ExecProvider {
        fn landmarks(&self, image: &str, crop: &BoundingBox) -> privpas_core::Result<Vec<FaceObservation>> {
            let extra = [image.to_string(), crop.x1.to_string(), crop.y1.to_string(), crop.x2.to_string(), crop.y2.to_string()];
            let text = self.run(&extra)?;
            let map = parse_landmarks(&text, Path::new(&self.program))
                .map_err(|e| privpas_core::Error::Provider(e.to_string()))?;
            Ok(map.into_values().flatten().flat_map(|e| e.faces).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
        p
    }

    #[test]
    fn detection_file_passthrough_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "d.jsonl",
            r#"{"image": "a.png", "detections": [{"class": "uses_wheelchair", "box": [10,10,60,80], "confidence": 0.93}]}"#,
        );
        let prov = FileDetectionProvider::load(&p).unwrap();
        let d = prov.detect("a.png").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].confidence, 0.93);
        assert!(prov.detect("zzz.png").unwrap().is_empty());
    }

    #[test]
    fn detection_file_rejects_bad_confidence() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "d.jsonl",
            r#"{"image": "a.png", "detections": [{"class": "uses_wheelchair", "box": [10,10,60,80], "confidence": 1.2}]}"#,
        );
        assert!(FileDetectionProvider::load(&p).is_err());
    }

    #[test]
    fn landmark_file_crop_rules() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "l.jsonl",
            concat!(
                r#"{"image": "a.png", "crop": [0,0,50,50], "faces": [{"h_y_deg": 1, "p_eye_left": 0.9, "p_eye_right": 0.9, "p_smile": 0.1}]}"#,
                "\n",
                r#"{"image": "a.png", "faces": [{"h_y_deg": 2, "p_eye_left": 0.9, "p_eye_right": 0.9, "p_smile": 0.1, "box": [60,60,70,70]}]}"#,
            ),
        );
        let prov = FileLandmarkProvider::load(&p).unwrap();
        let pinned = prov.landmarks("a.png", &BoundingBox::new(0.0, 0.0, 50.0, 50.0).unwrap()).unwrap();
        assert_eq!(pinned.iter().map(|f| f.head_yaw_deg).collect::<Vec<_>>(), [1.0]);
        let other = prov.landmarks("a.png", &BoundingBox::new(55.0, 55.0, 80.0, 80.0).unwrap()).unwrap();
        assert_eq!(other.iter().map(|f| f.head_yaw_deg).collect::<Vec<_>>(), [2.0]);
        assert!(prov.landmarks("b.png", &BoundingBox::new(0.0, 0.0, 5.0, 5.0).unwrap()).unwrap().is_empty());
    }
}
