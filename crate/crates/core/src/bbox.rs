//! Axis-aligned boxes in diagonal-corner form.

use crate::error::{Error, Result};

/// Pixel rectangle `(x1, y1)`–`(x2, y2)`, origin top-left, continuous coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BoundingBox {
    /// Checked constructor: coordinates finite and corners ordered.
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let b = BoundingBox { x1, y1, x2, y2 };
        b.check()?;
        Ok(b)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.x1.is_finite() && self.y1.is_finite() && self.x2.is_finite() && self.y2.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        if self.x1 > self.x2 || self.y1 > self.y2 {
            return Err(Error::InvertedBox);
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let x1 = self.x1.max(other.x1);
        let y1 = self.y1.max(other.y1);
        let x2 = self.x2.min(other.x2);
        let y2 = self.y2.min(other.y2);
        (x1 <= x2 && y1 <= y2).then_some(BoundingBox { x1, y1, x2, y2 })
    }

    /// True when `other` lies entirely inside `self` (boundaries included).
    pub fn contains(&self, other: &BoundingBox) -> bool {
        other.x1 >= self.x1 && other.y1 >= self.y1 && other.x2 <= self.x2 && other.y2 <= self.y2
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x1 && x <= self.x2 && y >= self.y1 && y <= self.y2
    }

    pub fn translate(&self, dx: f64, dy: f64) -> BoundingBox {
        BoundingBox { x1: self.x1 + dx, y1: self.y1 + dy, x2: self.x2 + dx, y2: self.y2 + dy }
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [(self.x1, self.y1), (self.x2, self.y1), (self.x1, self.y2), (self.x2, self.y2)]
    }

    /// Integer pixel span covered by the box: floor of the origin, ceil of the
    /// extent, limited to a `width x height` raster. Returns `(x0, y0, x1, y1)` as
    /// half-open ranges.
    pub fn pixel_span(&self, width: usize, height: usize) -> (usize, usize, usize, usize) {
        let clampu = |v: f64, hi: usize| -> usize {
            if v <= 0.0 {
                0
            } else if v >= hi as f64 {
                hi
            } else {
                v as usize
            }
        };
        (
            clampu(libm::floor(self.x1), width),
            clampu(libm::floor(self.y1), height),
            clampu(libm::ceil(self.x2), width),
            clampu(libm::ceil(self.y2), height),
        )
    }
}

/// Clamp `b` to `[0, width] x [0, height]`.
///
/// Rejects non-finite or inverted boxes, and boxes left with zero area once
/// clamped. Idempotent.
pub fn validate_box(b: BoundingBox, width: f64, height: f64) -> Result<BoundingBox> {
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::EmptyImage);
    }
    b.check()?;
    let clamped = BoundingBox {
        x1: b.x1.clamp(0.0, width),
        y1: b.y1.clamp(0.0, height),
        x2: b.x2.clamp(0.0, width),
        y2: b.y2.clamp(0.0, height),
    };
    if clamped.area() <= 0.0 {
        return Err(Error::DegenerateBox);
    }
    Ok(clamped)
}

/// Intersection over union. Zero for disjoint or zero-area boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = match a.intersection(b) {
        Some(i) => i.area(),
        None => return 0.0,
    };
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}
