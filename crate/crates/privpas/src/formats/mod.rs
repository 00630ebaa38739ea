//! On-disk formats: dataset manifests, detection/landmark JSON Lines, weights
//! and training features.

pub mod features;
pub mod jsonl;
pub mod manifest;
pub mod weights;

use privpas_core::{AccessibilityClass, BoundingBox, FaceObservation};
use serde::{Deserialize, Serialize};

/// `[x1, y1, x2, y2]`.
pub type WireBox = [f64; 4];

pub fn box_from_wire(b: WireBox) -> privpas_core::Result<BoundingBox> {
    BoundingBox::new(b[0], b[1], b[2], b[3])
}

pub fn box_to_wire(b: &BoundingBox) -> WireBox {
    [b.x1, b.y1, b.x2, b.y2]
}

pub fn class_from_wire(label: &str) -> privpas_core::Result<AccessibilityClass> {
    label.parse()
}

/// One face as stored in landmark files and manifests. Every probability is
/// required; a face with missing fields is rejected rather than defaulted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireFace {
    pub h_y_deg: f64,
    pub p_eye_left: f64,
    pub p_eye_right: f64,
    pub p_smile: f64,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<WireBox>,
}

impl WireFace {
    pub fn into_observation(self) -> privpas_core::Result<FaceObservation> {
        FaceObservation::new(
            self.h_y_deg,
            self.p_eye_left,
            self.p_eye_right,
            self.p_smile,
            self.bbox.map(box_from_wire).transpose()?,
        )
    }

    pub fn from_observation(o: &FaceObservation) -> Self {
        WireFace {
            h_y_deg: o.head_yaw_deg,
            p_eye_left: o.p_eye_left,
            p_eye_right: o.p_eye_right,
            p_smile: o.p_smile,
            bbox: o.face_box.as_ref().map(box_to_wire),
        }
    }
}
