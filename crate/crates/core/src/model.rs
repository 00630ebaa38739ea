//! Domain values shared by every stage of the pipeline.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};

/// The three accessibility markers a detector can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AccessibilityClass {
    UsesCrutches,
    UsesWheelchair,
    StructurallyImpaired,
}

impl AccessibilityClass {
    pub const ALL: [AccessibilityClass; 3] = [
        AccessibilityClass::UsesCrutches,
        AccessibilityClass::UsesWheelchair,
        AccessibilityClass::StructurallyImpaired,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AccessibilityClass::UsesCrutches => "uses_crutches",
            AccessibilityClass::UsesWheelchair => "uses_wheelchair",
            AccessibilityClass::StructurallyImpaired => "structurally_impaired",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AccessibilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AccessibilityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AccessibilityClass::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::UnknownClass(s.to_string()))
    }
}

/// Ground-truth box with its class and the sensitivity flag set by annotators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation {
    pub bbox: BoundingBox,
    pub class: AccessibilityClass,
    pub sensitive: bool,
}

impl Annotation {
    pub fn new(bbox: BoundingBox, class: AccessibilityClass, sensitive: bool) -> Result<Self> {
        bbox.check()?;
        Ok(Annotation { bbox, class, sensitive })
    }
}

/// A detector output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub class: AccessibilityClass,
    pub confidence: f64,
}

impl Detection {
    pub fn new(bbox: BoundingBox, class: AccessibilityClass, confidence: f64) -> Result<Self> {
        bbox.check()?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::OutOfRange { field: "confidence", value: confidence });
        }
        Ok(Detection { bbox, class, confidence })
    }
}

/// Landmark-derived features of one face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceObservation {
    /// Head Euler angle about the vertical axis, degrees.
    pub head_yaw_deg: f64,
    pub p_eye_left: f64,
    pub p_eye_right: f64,
    pub p_smile: f64,
    pub face_box: Option<BoundingBox>,
}

impl FaceObservation {
    pub fn new(
        head_yaw_deg: f64,
        p_eye_left: f64,
        p_eye_right: f64,
        p_smile: f64,
        face_box: Option<BoundingBox>,
    ) -> Result<Self> {
        let obs = FaceObservation { head_yaw_deg, p_eye_left, p_eye_right, p_smile, face_box };
        obs.check()?;
        Ok(obs)
    }

    pub fn check(&self) -> Result<()> {
        if !(-180.0..=180.0).contains(&self.head_yaw_deg) {
            return Err(Error::OutOfRange { field: "head_yaw_deg", value: self.head_yaw_deg });
        }
        for (field, value) in
            [("p_eye_left", self.p_eye_left), ("p_eye_right", self.p_eye_right), ("p_smile", self.p_smile)]
        {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange { field, value });
            }
        }
        if let Some(b) = &self.face_box {
            b.check()?;
        }
        Ok(())
    }
}

/// Coefficients of the linear awareness score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwarenessWeights {
    pub w_r: f64,
    pub w_e: f64,
    pub w_s: f64,
    pub bias_c: f64,
}

impl AwarenessWeights {
    /// Weights learned on the reference 500-image set.
    pub const PUBLISHED: AwarenessWeights =
        AwarenessWeights { w_r: -0.07572891, w_e: 0.59910001, w_s: -0.86601255, bias_c: -0.02311644 };

    pub fn new(w_r: f64, w_e: f64, w_s: f64, bias_c: f64) -> Result<Self> {
        let w = AwarenessWeights { w_r, w_e, w_s, bias_c };
        for (field, value) in [("w_r", w_r), ("w_e", w_e), ("w_s", w_s), ("c", bias_c)] {
            if !value.is_finite() {
                return Err(Error::OutOfRange { field, value });
            }
        }
        Ok(w)
    }

    pub fn scaled(&self, k: f64) -> AwarenessWeights {
        AwarenessWeights { w_r: self.w_r * k, w_e: self.w_e * k, w_s: self.w_s * k, bias_c: self.bias_c * k }
    }
}

impl Default for AwarenessWeights {
    fn default() -> Self {
        AwarenessWeights::PUBLISHED
    }
}

/// 8-bit raster, row-major, 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: u8,
    data: Vec<u8>,
}

impl fmt::Debug for ImageBuffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImageBuffer")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: u8, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidChannels(channels));
        }
        let expected = width * height * channels as usize;
        if data.len() != expected {
            return Err(Error::BufferSize { expected, actual: data.len() });
        }
        Ok(ImageBuffer { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: u8, value: u8) -> Result<Self> {
        let len = width * height * channels as usize;
        ImageBuffer::new(width, height, channels, vec![value; len])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    /// Full-image box `(0, 0, width, height)`.
    pub fn bounds(&self) -> BoundingBox {
        BoundingBox { x1: 0.0, y1: 0.0, x2: self.width as f64, y2: self.height as f64 }
    }

    #[inline]
    pub fn offset(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * self.channels as usize
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels as usize]
    }

    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [u8] {
        let o = self.offset(x, y);
        let c = self.channels as usize;
        &mut self.data[o..o + c]
    }
}

/// Round half away from zero and saturate into a byte.
#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    libm::round(v).clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_labels_round_trip() {
        for c in AccessibilityClass::ALL {
            assert_eq!(c.label().parse::<AccessibilityClass>().unwrap(), c);
        }
        assert!(matches!("bicycle".parse::<AccessibilityClass>(), Err(Error::UnknownClass(_))));
        assert!("Uses_Crutches".parse::<AccessibilityClass>().is_err());
    }

    #[test]
    fn detection_confidence_range() {
        let b = BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(Detection::new(b, AccessibilityClass::UsesWheelchair, 1.2).is_err());
        assert!(Detection::new(b, AccessibilityClass::UsesWheelchair, -0.1).is_err());
        assert!(Detection::new(b, AccessibilityClass::UsesWheelchair, 1.0).is_ok());
    }

    #[test]
    fn observation_ranges() {
        assert!(FaceObservation::new(-1.165, 0.996, 0.994, 0.182, None).is_ok());
        assert!(FaceObservation::new(181.0, 0.5, 0.5, 0.5, None).is_err());
        assert!(FaceObservation::new(0.0, 1.5, 0.5, 0.5, None).is_err());
        assert!(FaceObservation::new(0.0, 0.5, 0.5, f64::NAN, None).is_err());
    }

    #[test]
    fn image_buffer_invariants() {
        assert!(ImageBuffer::new(2, 2, 3, vec![0; 12]).is_ok());
        assert_eq!(ImageBuffer::new(2, 2, 3, vec![0; 11]), Err(Error::BufferSize { expected: 12, actual: 11 }));
        assert_eq!(ImageBuffer::new(2, 2, 4, vec![0; 16]), Err(Error::InvalidChannels(4)));
        assert_eq!(ImageBuffer::new(0, 2, 1, vec![]), Err(Error::EmptyImage));
    }

    #[test]
    fn quantize_rounds_half_away() {
        assert_eq!(quantize(63.5), 64);
        assert_eq!(quantize(63.49), 63);
        assert_eq!(quantize(-3.0), 0);
        assert_eq!(quantize(300.0), 255);
    }
}
