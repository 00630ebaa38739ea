//! Pure algorithmic core of the PrivPAS toolkit.
//!
//! Everything here runs on in-memory values and needs only `alloc`:
//! box geometry, face anonymization by Gaussian blur, augmentation with
//! bounding-box co-transformation, awareness scoring of a person of
//! interest, a logistic trainer for the scoring weights, and detection /
//! classification metrics. Decoding images, reading manifests and the
//! command line live in the `privpas` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod anonymizer;
pub mod augmentor;
pub mod awareness;
pub mod bbox;
pub mod error;
pub mod evaluator;
pub mod manifest;
pub mod model;
pub mod providers;
pub mod trainer;

pub use anonymizer::{anonymize_image, blur_region, enlarge_box, gaussian_kernel, BlurParams, EnlargeMode};
pub use augmentor::{
    augment_dataset, sample_augmentation, transform_boxes, transform_image, AugmentationRanges,
    AugmentationSample, Interval,
};
pub use awareness::{
    aggregate_scores, awareness_score, classify_awareness, rotational_factor, Aggregation, Awareness,
    AwarenessFeatures, GazeConfig,
};
pub use bbox::{iou, validate_box, BoundingBox};
pub use error::{Error, Result};
pub use evaluator::{
    average_precision, awareness_eval, classification_metrics, match_detections, mean_ap, ConfusionCounts,
    PrCurve,
};
pub use manifest::{DatasetManifest, ManifestRecord, Provenance, Split};
pub use model::{AccessibilityClass, Annotation, AwarenessWeights, Detection, FaceObservation, ImageBuffer};
pub use providers::{crop_poi, DetectionProvider, LandmarkProvider, StubDetectionProvider, StubLandmarkProvider};
pub use trainer::{train_weights, TrainParams};
