//! File formats, file-backed providers, pipeline orchestration and the
//! command-line surface around [`privpas_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod image_io;
pub mod pipeline;
pub mod providers;
pub mod render;
pub mod report;
pub mod store;

use std::path::Path;

pub use error::{Error, Result};

/// Write `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
