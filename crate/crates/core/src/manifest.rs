//! In-memory dataset index.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::augmentor::AugmentationSample;
use crate::error::{Error, Result};
use crate::model::{Annotation, FaceObservation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    #[default]
    Train,
    Val,
}

impl Split {
    pub fn label(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }
}

/// Links an augmented record back to the record it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub source: String,
    /// Zero-based augmentation index for this source.
    pub index: usize,
    pub sample: AugmentationSample,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ManifestRecord {
    pub image: String,
    pub split: Split,
    pub annotations: Vec<Annotation>,
    pub faces: Option<Vec<FaceObservation>>,
    pub awareness_gt: Option<bool>,
    pub provenance: Option<Provenance>,
}

impl ManifestRecord {
    pub fn new(image: impl Into<String>) -> Self {
        ManifestRecord { image: image.into(), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    /// Builds a manifest, rejecting duplicate image paths.
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self> {
        let m = DatasetManifest { records };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for r in &self.records {
            if !seen.insert(r.image.as_str()) {
                return Err(Error::DuplicateImage(r.image.clone()));
            }
            for a in &r.annotations {
                a.bbox.check()?;
            }
            if let Some(faces) = &r.faces {
                for f in faces {
                    f.check()?;
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, image: &str) -> Option<&ManifestRecord> {
        self.records.iter().find(|r| r.image == image)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_paths_rejected() {
        let recs = alloc::vec![ManifestRecord::new("a.png"), ManifestRecord::new("b.png"), ManifestRecord::new("a.png")];
        assert_eq!(DatasetManifest::new(recs), Err(Error::DuplicateImage("a.png".into())));
    }

    #[test]
    fn lookup() {
        let m = DatasetManifest::new(alloc::vec![ManifestRecord::new("a.png")]).unwrap();
        assert!(m.get("a.png").is_some());
        assert!(m.get("c.png").is_none());
    }
}
