//! Seams for detectors and facial-landmark models.
//!
//! Real inference backends implement these traits outside this crate. The
//! stub providers here answer from in-memory tables and are fully
//! deterministic.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};
use crate::model::{AccessibilityClass, Detection, FaceObservation, ImageBuffer};

/// Source of accessibility-marker detections for an image.
pub trait DetectionProvider: Send + Sync {
    /// Classes this provider can report.
    fn classes(&self) -> &[AccessibilityClass] {
        &AccessibilityClass::ALL
    }

    fn detect(&self, image: &str) -> Result<Vec<Detection>>;
}

/// Source of face observations inside a crop of an image. Face boxes are in
/// full-image coordinates and must lie within `crop`.
pub trait LandmarkProvider: Send + Sync {
    fn landmarks(&self, image: &str, crop: &BoundingBox) -> Result<Vec<FaceObservation>>;
}

/// Query `provider` and enforce its postcondition: every returned face box
/// lies within the crop.
pub fn checked_landmarks(provider: &dyn LandmarkProvider, image: &str, crop: &BoundingBox) -> Result<Vec<FaceObservation>> {
    let faces = provider.landmarks(image, crop)?;
    for f in &faces {
        f.check()?;
        if let Some(b) = &f.face_box {
            if !crop.contains(b) {
                return Err(Error::FaceOutsideCrop);
            }
        }
    }
    Ok(faces)
}

#[derive(Debug, Clone, Default)]
pub struct StubDetectionProvider {
    table: BTreeMap<String, Vec<Detection>>,
}

impl StubDetectionProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, image: impl Into<String>, detections: Vec<Detection>) {
        self.table.insert(image.into(), detections);
    }

    pub fn contains(&self, image: &str) -> bool {
        self.table.contains_key(image)
    }
}

impl DetectionProvider for StubDetectionProvider {
    fn detect(&self, image: &str) -> Result<Vec<Detection>> {
        Ok(self.table.get(image).cloned().unwrap_or_default())
    }
}

fn crop_key(crop: &BoundingBox) -> [u64; 4] {
    [crop.x1.to_bits(), crop.y1.to_bits(), crop.x2.to_bits(), crop.y2.to_bits()]
}

/// Exact `(image, crop)` lookup table of face observations.
#[derive(Debug, Clone, Default)]
pub struct StubLandmarkProvider {
    table: BTreeMap<(String, [u64; 4]), Vec<FaceObservation>>,
}

impl StubLandmarkProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, image: impl Into<String>, crop: BoundingBox, faces: Vec<FaceObservation>) {
        self.table.insert((image.into(), crop_key(&crop)), faces);
    }
}

impl LandmarkProvider for StubLandmarkProvider {
    fn landmarks(&self, image: &str, crop: &BoundingBox) -> Result<Vec<FaceObservation>> {
        Ok(self.table.get(&(String::from(image), crop_key(crop))).cloned().unwrap_or_default())
    }
}

/// Copy out the pixels under `b`: origin floored, extent ceiled.
pub fn crop_poi(image: &ImageBuffer, b: &BoundingBox) -> Result<ImageBuffer> {
    b.check()?;
    let (x0, y0, x1, y1) = b.pixel_span(image.width(), image.height());
    if x1 <= x0 || y1 <= y0 {
        return Err(Error::DegenerateBox);
    }
    let c = image.channels() as usize;
    let mut data = Vec::with_capacity((x1 - x0) * (y1 - y0) * c);
    for y in y0..y1 {
        let start = image.offset(x0, y);
        data.extend_from_slice(&image.data()[start..start + (x1 - x0) * c]);
    }
    ImageBuffer::new(x1 - x0, y1 - y0, image.channels(), data)
}

/// Pick the person of interest among faces found in one crop: largest face
/// box by area, ties broken by the topmost box, then by list order. Faces
/// without a box count as zero area.
pub fn select_poi_face(faces: &[FaceObservation]) -> Option<&FaceObservation> {
    let area = |f: &FaceObservation| f.face_box.map_or(0.0, |b| b.area());
    let top = |f: &FaceObservation| f.face_box.map_or(f64::INFINITY, |b| b.y1);
    let mut best: Option<&FaceObservation> = None;
    for f in faces {
        best = match best {
            None => Some(f),
            Some(b) if area(f) > area(b) || (area(f) == area(b) && top(f) < top(b)) => Some(f),
            keep => keep,
        };
    }
    best
}
