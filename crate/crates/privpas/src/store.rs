use std::path::{Path, PathBuf};

use privpas_core::augmentor::ImageStore;
use privpas_core::ImageBuffer;

use crate::image_io::{load_image, save_png};

/// Reads images relative to one directory and writes PNGs relative to another.
#[derive(Debug, Clone)]
pub struct FsImageStore {
    pub read_root: PathBuf,
    pub write_root: PathBuf,
}

pub fn resolve(root: &Path, image: &str) -> PathBuf {
    let p = Path::new(image);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

impl ImageStore for FsImageStore {
    fn load(&mut self, path: &str) -> Result<ImageBuffer, String> {
        load_image(&resolve(&self.read_root, path)).map_err(|e| e.to_string())
    }

    fn store(&mut self, path: &str, image: &ImageBuffer) -> Result<(), String> {
        save_png(image, &resolve(&self.write_root, path)).map_err(|e| e.to_string())
    }
}
