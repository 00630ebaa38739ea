//! Raster IO. PNG and JPEG are decoded; only PNG is written.

use std::path::Path;

use image::{DynamicImage, ImageFormat};
use privpas_core::ImageBuffer;

use crate::error::{Error, Result};

/// Decode a PNG or JPEG into an 8-bit gray or RGB buffer. Alpha is dropped and
/// 16-bit samples are reduced to 8 bits.
pub fn load_image(path: &Path) -> Result<ImageBuffer> {
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match img.format() {
        Some(ImageFormat::Png | ImageFormat::Jpeg) => {}
        other => return Err(Error::format(path, format!("unsupported image format {other:?}"))),
    }
    let decoded = img.decode().map_err(|source| Error::Image { path: path.into(), source })?;
    Ok(from_dynamic(decoded))
}

pub fn from_dynamic(img: DynamicImage) -> ImageBuffer {
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(g) => ImageBuffer::new(w, h, 1, g.into_raw()),
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => {
            ImageBuffer::new(w, h, 1, img.into_luma8().into_raw())
        }
        other => ImageBuffer::new(w, h, 3, other.into_rgb8().into_raw()),
    }
    .expect("decoded image has consistent dimensions")
}

pub fn to_dynamic(img: &ImageBuffer) -> DynamicImage {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let data = img.data().to_vec();
    if img.channels() == 1 {
        DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, data).expect("buffer size checked"))
    } else {
        DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, data).expect("buffer size checked"))
    }
}

/// Write `img` as PNG, creating parent directories.
pub fn save_png(img: &ImageBuffer, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    to_dynamic(img)
        .save_with_format(path, ImageFormat::Png)
        .map_err(|source| Error::Image { path: path.into(), source })
}
