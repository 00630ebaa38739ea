//! Face de-identification: grow each face box, then Gaussian-blur the crop.

use alloc::vec;
use alloc::vec::Vec;

use crate::bbox::{validate_box, BoundingBox};
use crate::error::{Error, Result};
use crate::model::{quantize, ImageBuffer};

/// Gaussian blur settings. Defaults are a 25-pixel kernel with sigma 30.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurParams {
    pub kernel_size: usize,
    pub sigma: f64,
}

impl BlurParams {
    pub fn new(kernel_size: usize, sigma: f64) -> Result<Self> {
        let p = BlurParams { kernel_size, sigma };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if self.kernel_size < 3 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::InvalidBlurParams("kernel size must be odd and at least 3"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidBlurParams("sigma must be positive"));
        }
        Ok(())
    }

    pub fn radius(&self) -> usize {
        self.kernel_size / 2
    }
}

impl Default for BlurParams {
    fn default() -> Self {
        BlurParams { kernel_size: 25, sigma: 30.0 }
    }
}

/// How face boxes are grown before blurring.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EnlargeMode {
    /// Each coordinate moves by a fifth of its own value:
    /// `(x1 - x1/5, y1 - y1/5, x2 + x2/5, y2 + y2/5)`. The margin therefore
    /// scales with the distance from the image origin, not with the box size.
    #[default]
    CoordinateFifth,
    /// Pad every side by this fraction of the box width/height.
    PadFractionOfBox(f64),
}

/// Grow a face box with [`EnlargeMode::CoordinateFifth`] and clamp it to the image.
pub fn enlarge_box(b: BoundingBox, width: f64, height: f64) -> Result<BoundingBox> {
    enlarge_box_with(b, width, height, EnlargeMode::CoordinateFifth)
}

pub fn enlarge_box_with(b: BoundingBox, width: f64, height: f64, mode: EnlargeMode) -> Result<BoundingBox> {
    let b = validate_box(b, width, height)?;
    let grown = match mode {
        EnlargeMode::CoordinateFifth => BoundingBox {
            x1: b.x1 - b.x1 / 5.0,
            y1: b.y1 - b.y1 / 5.0,
            x2: b.x2 + b.x2 / 5.0,
            y2: b.y2 + b.y2 / 5.0,
        },
        EnlargeMode::PadFractionOfBox(f) => {
            if !(f.is_finite() && f >= 0.0) {
                return Err(Error::OutOfRange { field: "pad_fraction", value: f });
            }
            let (dx, dy) = (b.width() * f, b.height() * f);
            BoundingBox { x1: b.x1 - dx, y1: b.y1 - dy, x2: b.x2 + dx, y2: b.y2 + dy }
        }
    };
    validate_box(grown, width, height)
}

/// Square convolution kernel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at integer offset `(dx, dy)` from the centre.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let r = (self.size / 2) as isize;
        self.weights[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Sampled 2-D Gaussian `exp(-(x^2 + y^2) / (2 sigma^2))` over integer offsets,
/// normalized to unit sum.
pub fn gaussian_kernel(params: &BlurParams) -> Result<Kernel> {
    params.check()?;
    let size = params.kernel_size;
    let r = params.radius() as isize;
    let denom = 2.0 * params.sigma * params.sigma;
    let mut weights = Vec::with_capacity(size * size);
    for y in -r..=r {
        for x in -r..=r {
            weights.push(libm::exp(-((x * x + y * y) as f64) / denom));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(Kernel { size, weights })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlurStatus {
    Applied,
    /// Region covered no pixels; image returned unchanged.
    EmptyRegion,
}

/// Blur the pixels covered by `region` (floor origin, ceil extent) and return a
/// new image. Pixels outside the region are copied untouched.
pub fn blur_region(image: &ImageBuffer, region: &BoundingBox, params: &BlurParams) -> Result<(ImageBuffer, BlurStatus)> {
    let mut out = image.clone();
    let status = blur_region_in_place(&mut out, region, params)?;
    Ok((out, status))
}

/// In-place form of [`blur_region`].
///
/// Neighbourhood samples that fall outside the region are replicated from its
/// nearest edge, so only pixels inside the region are ever read.
pub fn blur_region_in_place(image: &mut ImageBuffer, region: &BoundingBox, params: &BlurParams) -> Result<BlurStatus> {
    region.check()?;
    let kernel = gaussian_kernel(params)?;
    let (x0, y0, x1, y1) = region.pixel_span(image.width(), image.height());
    if x1 <= x0 || y1 <= y0 {
        return Ok(BlurStatus::EmptyRegion);
    }
    let (cw, ch) = (x1 - x0, y1 - y0);
    let r = params.radius();
    let ks = kernel.size();
    let channels = image.channels() as usize;
    let (pw, ph) = (cw + 2 * r, ch + 2 * r);

    let mut padded = vec![0.0f64; pw * ph];
    let mut acc = vec![0.0f64; cw];
    for c in 0..channels {
        for py in 0..ph {
            let sy = y0 + (py.saturating_sub(r)).min(ch - 1);
            for px in 0..pw {
                let sx = x0 + (px.saturating_sub(r)).min(cw - 1);
                padded[py * pw + px] = image.data()[image.offset(sx, sy) + c] as f64;
            }
        }
        for oy in 0..ch {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for ky in 0..ks {
                let row = &padded[(oy + ky) * pw..(oy + ky + 1) * pw];
                let krow = &kernel.weights()[ky * ks..(ky + 1) * ks];
                for (ox, a) in acc.iter_mut().enumerate() {
                    let window = &row[ox..ox + ks];
                    *a += window.iter().zip(krow).map(|(p, k)| p * k).sum::<f64>();
                }
            }
            for (ox, a) in acc.iter().enumerate() {
                let o = image.offset(x0 + ox, y0 + oy) + c;
                image.data_mut()[o] = quantize(*a);
            }
        }
    }
    Ok(BlurStatus::Applied)
}

/// Enlarge every face box and blur it, in input order.
pub fn anonymize_image(image: &ImageBuffer, faces: &[BoundingBox], params: &BlurParams) -> Result<ImageBuffer> {
    anonymize_image_with(image, faces, params, EnlargeMode::CoordinateFifth)
}

pub fn anonymize_image_with(
    image: &ImageBuffer,
    faces: &[BoundingBox],
    params: &BlurParams,
    mode: EnlargeMode,
) -> Result<ImageBuffer> {
    params.check()?;
    let mut out = image.clone();
    let (w, h) = (image.width() as f64, image.height() as f64);
    for face in faces {
        let grown = enlarge_box_with(*face, w, h, mode)?;
        blur_region_in_place(&mut out, &grown, params)?;
    }
    Ok(out)
}
