//! Photometric and geometric augmentation with box co-transformation.
//!
//! Geometric steps run in a fixed order: horizontal flip, vertical flip,
//! scale about the image centre, rotation about the image centre, then
//! translation. Photometric steps (brightness, then the optional contrast,
//! saturation and hue) follow. A positive rotation angle turns
//! counterclockwise in the y-down pixel frame, which reads as clockwise on
//! screen. Every step that is an exact identity (scale 1, angle 0, shift 0)
//! is skipped so that axis-preserving maps stay bit-exact.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};
use crate::manifest::{DatasetManifest, ManifestRecord, Provenance};
use crate::model::{quantize, Annotation, ImageBuffer};

/// Order in which [`transform_image`] applies its steps.
pub const TRANSFORM_ORDER: &str = "flip_h,flip_v,scale,rotate,translate,brightness,contrast,saturation,hue";

/// Boxes keeping less than this fraction of their transformed area on the
/// canvas are dropped.
pub const MIN_VISIBILITY: f64 = 0.25;

/// Number of augmented copies produced per source image by default.
pub const DEFAULT_PER_IMAGE: usize = 10;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    fn check(&self, field: &'static str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::InvalidInterval { field });
        }
        Ok(())
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    fn draw(&self, rng: &mut impl RngCore) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let u: f64 = rng.gen();
        (self.lo + (self.hi - self.lo) * u).min(self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationRanges {
    pub rotation_deg: Interval,
    pub brightness: Interval,
    pub scale: Interval,
    /// Fraction of the image width.
    pub translate_x: Interval,
    /// Fraction of the image height.
    pub translate_y: Interval,
    pub flip_horizontal: bool,
    pub flip_vertical: bool,
    /// Off by default.
    pub contrast: Option<Interval>,
    /// Off by default.
    pub saturation: Option<Interval>,
    /// Off by default. Degrees of hue rotation.
    pub hue_deg: Option<Interval>,
}

impl Default for AugmentationRanges {
    fn default() -> Self {
        AugmentationRanges {
            rotation_deg: Interval::new(0.0, 90.0),
            brightness: Interval::new(0.2, 1.0),
            scale: Interval::new(0.5, 1.0),
            translate_x: Interval::new(-0.2, 0.3),
            translate_y: Interval::new(-0.1, 0.3),
            flip_horizontal: true,
            flip_vertical: true,
            contrast: None,
            saturation: None,
            hue_deg: None,
        }
    }
}

impl AugmentationRanges {
    pub fn check(&self) -> Result<()> {
        self.rotation_deg.check("rotation_deg")?;
        self.brightness.check("brightness")?;
        self.scale.check("scale")?;
        self.translate_x.check("translate_x")?;
        self.translate_y.check("translate_y")?;
        if self.scale.lo <= 0.0 {
            return Err(Error::InvalidInterval { field: "scale" });
        }
        if self.brightness.lo < 0.0 {
            return Err(Error::InvalidInterval { field: "brightness" });
        }
        if let Some(c) = &self.contrast {
            c.check("contrast")?;
        }
        if let Some(s) = &self.saturation {
            s.check("saturation")?;
        }
        if let Some(h) = &self.hue_deg {
            h.check("hue_deg")?;
        }
        Ok(())
    }

    /// Ranges that always yield the identity sample.
    pub fn identity() -> Self {
        AugmentationRanges {
            rotation_deg: Interval::point(0.0),
            brightness: Interval::point(1.0),
            scale: Interval::point(1.0),
            translate_x: Interval::point(0.0),
            translate_y: Interval::point(0.0),
            flip_horizontal: false,
            flip_vertical: false,
            contrast: None,
            saturation: None,
            hue_deg: None,
        }
    }
}

/// One concrete draw from [`AugmentationRanges`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationSample {
    pub rotation_deg: f64,
    pub brightness: f64,
    pub scale: f64,
    pub translate_x: f64,
    pub translate_y: f64,
    pub flip_h: bool,
    pub flip_v: bool,
    pub contrast: Option<f64>,
    pub saturation: Option<f64>,
    pub hue_deg: Option<f64>,
    pub rng_seed: u64,
}

impl AugmentationSample {
    pub fn identity() -> Self {
        AugmentationSample {
            rotation_deg: 0.0,
            brightness: 1.0,
            scale: 1.0,
            translate_x: 0.0,
            translate_y: 0.0,
            flip_h: false,
            flip_v: false,
            contrast: None,
            saturation: None,
            hue_deg: None,
            rng_seed: 0,
        }
    }

    fn is_geometric_identity(&self) -> bool {
        !self.flip_h
            && !self.flip_v
            && self.scale == 1.0
            && self.rotation_deg == 0.0
            && self.translate_x == 0.0
            && self.translate_y == 0.0
    }
}

/// Draw every parameter independently and uniformly from its range.
///
/// Flips are fair coin tosses when allowed. The draw is a pure function of
/// `(ranges, seed)`.
pub fn sample_augmentation(ranges: &AugmentationRanges, seed: u64) -> Result<AugmentationSample> {
    ranges.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotation_deg = ranges.rotation_deg.draw(&mut rng);
    let brightness = ranges.brightness.draw(&mut rng);
    let scale = ranges.scale.draw(&mut rng);
    let translate_x = ranges.translate_x.draw(&mut rng);
    let translate_y = ranges.translate_y.draw(&mut rng);
    let flip_h = ranges.flip_horizontal && rng.gen_bool(0.5);
    let flip_v = ranges.flip_vertical && rng.gen_bool(0.5);
    let contrast = ranges.contrast.map(|i| i.draw(&mut rng));
    let saturation = ranges.saturation.map(|i| i.draw(&mut rng));
    let hue_deg = ranges.hue_deg.map(|i| i.draw(&mut rng));
    Ok(AugmentationSample {
        rotation_deg,
        brightness,
        scale,
        translate_x,
        translate_y,
        flip_h,
        flip_v,
        contrast,
        saturation,
        hue_deg,
        rng_seed: seed,
    })
}

/// Geometric part of a sample, bound to a canvas size.
#[derive(Debug, Clone, Copy)]
struct Warp {
    width: f64,
    height: f64,
    flip_h: bool,
    flip_v: bool,
    scale: f64,
    cos: f64,
    sin: f64,
    rotate: bool,
    dx: f64,
    dy: f64,
}

impl Warp {
    fn new(sample: &AugmentationSample, width: f64, height: f64) -> Self {
        let theta = sample.rotation_deg.to_radians();
        Warp {
            width,
            height,
            flip_h: sample.flip_h,
            flip_v: sample.flip_v,
            scale: sample.scale,
            cos: libm::cos(theta),
            sin: libm::sin(theta),
            rotate: sample.rotation_deg != 0.0,
            dx: sample.translate_x * width,
            dy: sample.translate_y * height,
        }
    }

    fn forward(&self, mut x: f64, mut y: f64) -> (f64, f64) {
        let (cx, cy) = (self.width / 2.0, self.height / 2.0);
        if self.flip_h {
            x = self.width - x;
        }
        if self.flip_v {
            y = self.height - y;
        }
        if self.scale != 1.0 {
            x = cx + self.scale * (x - cx);
            y = cy + self.scale * (y - cy);
        }
        if self.rotate {
            let (ux, uy) = (x - cx, y - cy);
            x = cx + self.cos * ux - self.sin * uy;
            y = cy + self.sin * ux + self.cos * uy;
        }
        if self.dx != 0.0 {
            x += self.dx;
        }
        if self.dy != 0.0 {
            y += self.dy;
        }
        (x, y)
    }

    fn inverse(&self, mut x: f64, mut y: f64) -> (f64, f64) {
        let (cx, cy) = (self.width / 2.0, self.height / 2.0);
        if self.dx != 0.0 {
            x -= self.dx;
        }
        if self.dy != 0.0 {
            y -= self.dy;
        }
        if self.rotate {
            let (ux, uy) = (x - cx, y - cy);
            x = cx + self.cos * ux + self.sin * uy;
            y = cy - self.sin * ux + self.cos * uy;
        }
        if self.scale != 1.0 {
            x = cx + (x - cx) / self.scale;
            y = cy + (y - cy) / self.scale;
        }
        if self.flip_v {
            y = self.height - y;
        }
        if self.flip_h {
            x = self.width - x;
        }
        (x, y)
    }
}

/// Bilinear lookup at continuous pixel position `(x, y)` (pixel centres at
/// half-integers). Returns `None` when the position is off the source canvas.
fn sample_bilinear(image: &ImageBuffer, x: f64, y: f64, out: &mut [f64]) -> bool {
    let (w, h) = (image.width(), image.height());
    if !(x >= 0.0 && y >= 0.0 && x <= w as f64 && y <= h as f64) {
        return false;
    }
    let u = x - 0.5;
    let v = y - 0.5;
    let fu = libm::floor(u);
    let fv = libm::floor(v);
    let (tx, ty) = (u - fu, v - fv);
    let clampi = |i: f64, n: usize| -> usize { (i.max(0.0) as usize).min(n - 1) };
    let x0 = clampi(fu, w);
    let x1 = clampi(fu + 1.0, w);
    let y0 = clampi(fv, h);
    let y1 = clampi(fv + 1.0, h);
    let (p00, p10, p01, p11) = (image.pixel(x0, y0), image.pixel(x1, y0), image.pixel(x0, y1), image.pixel(x1, y1));
    for c in 0..out.len() {
        let top = if tx == 0.0 { p00[c] as f64 } else { p00[c] as f64 * (1.0 - tx) + p10[c] as f64 * tx };
        let bottom = if tx == 0.0 { p01[c] as f64 } else { p01[c] as f64 * (1.0 - tx) + p11[c] as f64 * tx };
        out[c] = if ty == 0.0 { top } else { top * (1.0 - ty) + bottom * ty };
    }
    true
}

fn photometric(sample: &AugmentationSample, px: &mut [f64]) {
    for v in px.iter_mut() {
        *v *= sample.brightness;
    }
    if let Some(c) = sample.contrast {
        for v in px.iter_mut() {
            *v = (*v - 128.0) * c + 128.0;
        }
    }
    if px.len() != 3 {
        return;
    }
    if let Some(s) = sample.saturation {
        let gray = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
        for v in px.iter_mut() {
            *v = gray + s * (*v - gray);
        }
    }
    if let Some(hue) = sample.hue_deg {
        // rotate chroma in YIQ space
        let (r, g, b) = (px[0], px[1], px[2]);
        let yy = 0.299 * r + 0.587 * g + 0.114 * b;
        let i = 0.596 * r - 0.274 * g - 0.322 * b;
        let q = 0.211 * r - 0.523 * g + 0.312 * b;
        let t = hue.to_radians();
        let (c, s) = (libm::cos(t), libm::sin(t));
        let (i2, q2) = (i * c - q * s, i * s + q * c);
        px[0] = yy + 0.956 * i2 + 0.621 * q2;
        px[1] = yy - 0.272 * i2 - 0.647 * q2;
        px[2] = yy - 1.106 * i2 + 1.703 * q2;
    }
}

/// Apply `sample` to an image. The canvas keeps its size; uncovered pixels are
/// black. Geometric warps use bilinear interpolation; the result is rounded
/// half away from zero once, after all photometric steps.
pub fn transform_image(image: &ImageBuffer, sample: &AugmentationSample) -> ImageBuffer {
    let (w, h) = (image.width(), image.height());
    let channels = image.channels() as usize;
    let warp = Warp::new(sample, w as f64, h as f64);
    let geometric_identity = sample.is_geometric_identity();
    let mut out = image.clone();
    let mut px = [0.0f64; 3];
    for y in 0..h {
        for x in 0..w {
            let px = &mut px[..channels];
            let covered = if geometric_identity {
                for (c, v) in image.pixel(x, y).iter().enumerate() {
                    px[c] = *v as f64;
                }
                true
            } else {
                let (sx, sy) = warp.inverse(x as f64 + 0.5, y as f64 + 0.5);
                sample_bilinear(image, sx, sy, px)
            };
            let dst = out.pixel_mut(x, y);
            if covered {
                photometric(sample, px);
                for (d, v) in dst.iter_mut().zip(px.iter()) {
                    *d = quantize(*v);
                }
            } else {
                dst.iter_mut().for_each(|d| *d = 0);
            }
        }
    }
    out
}

/// Map one box through the sample's geometry: axis-aligned hull of the four
/// mapped corners, before clamping.
pub fn transform_box(b: &BoundingBox, sample: &AugmentationSample, width: f64, height: f64) -> BoundingBox {
    let warp = Warp::new(sample, width, height);
    let mut hull = BoundingBox { x1: f64::INFINITY, y1: f64::INFINITY, x2: f64::NEG_INFINITY, y2: f64::NEG_INFINITY };
    for (x, y) in b.corners() {
        let (mx, my) = warp.forward(x, y);
        hull.x1 = hull.x1.min(mx);
        hull.y1 = hull.y1.min(my);
        hull.x2 = hull.x2.max(mx);
        hull.y2 = hull.y2.max(my);
    }
    hull
}

/// Co-transform annotations with the image. Boxes are clamped to the canvas
/// and dropped when less than [`MIN_VISIBILITY`] of their hull remains.
pub fn transform_boxes(boxes: &[Annotation], sample: &AugmentationSample, width: f64, height: f64) -> Vec<Annotation> {
    transform_boxes_with(boxes, sample, width, height, MIN_VISIBILITY)
}

pub fn transform_boxes_with(
    boxes: &[Annotation],
    sample: &AugmentationSample,
    width: f64,
    height: f64,
    min_visibility: f64,
) -> Vec<Annotation> {
    let canvas = BoundingBox { x1: 0.0, y1: 0.0, x2: width, y2: height };
    boxes
        .iter()
        .filter_map(|a| {
            let hull = transform_box(&a.bbox, sample, width, height);
            let full = hull.area();
            let visible = hull.intersection(&canvas)?;
            let seen = visible.area();
            if seen <= 0.0 || full <= 0.0 || seen / full < min_visibility {
                return None;
            }
            Some(Annotation { bbox: visible, class: a.class, sensitive: a.sensitive })
        })
        .collect()
}

/// Source of images for [`augment_dataset`] and sink for its outputs.
pub trait ImageStore {
    fn load(&mut self, path: &str) -> core::result::Result<ImageBuffer, String>;
    fn store(&mut self, path: &str, image: &ImageBuffer) -> core::result::Result<(), String>;
}

/// Path of the `index`-th augmented copy of `source`: `dir/stem_augNN.png`.
pub fn augmented_path(source: &str, index: usize) -> String {
    let slash = source.rfind('/').map_or(0, |i| i + 1);
    let stem = match source[slash..].rfind('.') {
        Some(dot) if dot > 0 => &source[..slash + dot],
        _ => source,
    };
    format!("{stem}_aug{index:02}.png")
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentOutcome {
    pub manifest: DatasetManifest,
    /// `(image, reason)` for records that could not be processed.
    pub skipped: Vec<(String, String)>,
}

/// Expand a manifest: every readable source record is followed by `per_image`
/// augmented records with co-transformed annotations.
///
/// Per-augmentation seeds come from a ChaCha stream keyed by the record's
/// position, so the output depends only on `(manifest, ranges, per_image, seed)`.
pub fn augment_dataset(
    manifest: &DatasetManifest,
    ranges: &AugmentationRanges,
    per_image: usize,
    seed: u64,
    store: &mut dyn ImageStore,
) -> Result<AugmentOutcome> {
    ranges.check()?;
    if per_image == 0 {
        return Ok(AugmentOutcome { manifest: manifest.clone(), skipped: Vec::new() });
    }
    let mut records = Vec::with_capacity(manifest.len() * (per_image + 1));
    let mut skipped = Vec::new();
    for (i, record) in manifest.records.iter().enumerate() {
        let image = match store.load(&record.image) {
            Ok(img) => img,
            Err(e) => {
                skipped.push((record.image.clone(), e));
                continue;
            }
        };
        let mut seeds = ChaCha8Rng::seed_from_u64(seed);
        seeds.set_stream(i as u64);
        let (w, h) = (image.width() as f64, image.height() as f64);
        let mut produced = Vec::with_capacity(per_image);
        let mut failed = None;
        for k in 0..per_image {
            let sample = sample_augmentation(ranges, seeds.next_u64())?;
            let out = transform_image(&image, &sample);
            let path = augmented_path(&record.image, k);
            if let Err(e) = store.store(&path, &out) {
                failed = Some(e);
                break;
            }
            produced.push(ManifestRecord {
                image: path,
                split: record.split,
                annotations: transform_boxes(&record.annotations, &sample, w, h),
                faces: None,
                awareness_gt: None,
                provenance: Some(Provenance { source: record.image.clone(), index: k, sample }),
            });
        }
        if let Some(e) = failed {
            skipped.push((record.image.clone(), e));
            continue;
        }
        records.push(record.clone());
        records.extend(produced);
    }
    Ok(AugmentOutcome { manifest: DatasetManifest::new(records)?, skipped })
}
