//! TOML run configuration. Every key is optional; command-line flags
//! override what the file says.
//!
//! ```toml
//! seed = 7
//! workers = 4
//! out_dir = "out"
//! emit_annotated = false
//!
//! [providers]
//! detections = "detections.jsonl"
//! landmarks = "landmarks.jsonl"
//!
//! [awareness]
//! weights = "weights.txt"     # published weights when absent
//! tau_r_deg = 10.0
//! aggregation = "poi"         # min | avg | poi
//!
//! [blur]
//! kernel_size = 25
//! sigma = 30.0
//! enlarge = "coordinate_fifth" # or "pad_fraction" with pad_fraction = 0.2
//!
//! [augment]
//! per_image = 10
//! rotation_deg = [0.0, 90.0]
//! brightness = [0.2, 1.0]
//! scale = [0.5, 1.0]
//! translate_x = [-0.2, 0.3]
//! translate_y = [-0.1, 0.3]
//! flip_horizontal = true
//! flip_vertical = true
//! # contrast = [0.8, 1.2]; saturation = [0.5, 1.5]; hue_deg = [-20.0, 20.0]
//!
//! [eval]
//! iou_threshold = 0.5
//! interpolation = "all_point" # or "eleven_point"
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use privpas_core::anonymizer::EnlargeMode;
use privpas_core::evaluator::Interpolation;
use privpas_core::{Aggregation, AugmentationRanges, BlurParams, GazeConfig, Interval};
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
    pub emit_annotated: bool,
    pub providers: ProvidersSection,
    pub awareness: AwarenessSection,
    pub blur: BlurSection,
    pub augment: AugmentSection,
    pub eval: EvalSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            workers: 1,
            out_dir: None,
            emit_annotated: false,
            providers: Default::default(),
            awareness: Default::default(),
            blur: Default::default(),
            augment: Default::default(),
            eval: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProvidersSection {
    pub detections: Option<PathBuf>,
    pub landmarks: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AwarenessSection {
    pub weights: Option<PathBuf>,
    pub tau_r_deg: f64,
    pub aggregation: String,
}

impl Default for AwarenessSection {
    fn default() -> Self {
        AwarenessSection { weights: None, tau_r_deg: 10.0, aggregation: "poi".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlurSection {
    pub kernel_size: usize,
    pub sigma: f64,
    pub enlarge: String,
    pub pad_fraction: Option<f64>,
}

impl Default for BlurSection {
    fn default() -> Self {
        BlurSection { kernel_size: 25, sigma: 30.0, enlarge: "coordinate_fifth".into(), pad_fraction: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSection {
    pub per_image: usize,
    pub rotation_deg: [f64; 2],
    pub brightness: [f64; 2],
    pub scale: [f64; 2],
    pub translate_x: [f64; 2],
    pub translate_y: [f64; 2],
    pub flip_horizontal: bool,
    pub flip_vertical: bool,
    pub contrast: Option<[f64; 2]>,
    pub saturation: Option<[f64; 2]>,
    pub hue_deg: Option<[f64; 2]>,
}

impl Default for AugmentSection {
    fn default() -> Self {
        let r = AugmentationRanges::default();
        let pair = |i: Interval| [i.lo, i.hi];
        AugmentSection {
            per_image: privpas_core::augmentor::DEFAULT_PER_IMAGE,
            rotation_deg: pair(r.rotation_deg),
            brightness: pair(r.brightness),
            scale: pair(r.scale),
            translate_x: pair(r.translate_x),
            translate_y: pair(r.translate_y),
            flip_horizontal: r.flip_horizontal,
            flip_vertical: r.flip_vertical,
            contrast: None,
            saturation: None,
            hue_deg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub iou_threshold: f64,
    pub interpolation: String,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { iou_threshold: 0.5, interpolation: "all_point".into() }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read, resolve relative paths against the file's directory, validate.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(inner) = p.as_mut() {
                if inner.is_relative() {
                    *inner = base.join(&*inner);
                }
            }
        };
        rebase(&mut cfg.providers.detections);
        rebase(&mut cfg.providers.landmarks);
        rebase(&mut cfg.awareness.weights);
        rebase(&mut cfg.out_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Referenced input files must exist and every section must convert.
    pub fn validate(&self) -> Result<()> {
        for p in [&self.providers.detections, &self.providers.landmarks, &self.awareness.weights].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        self.gaze()?;
        self.aggregation()?;
        self.blur_params()?;
        self.enlarge_mode()?;
        self.ranges()?;
        self.interpolation()?;
        if !(self.eval.iou_threshold > 0.0 && self.eval.iou_threshold <= 1.0) {
            return Err(Error::Config("eval.iou_threshold must be in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn gaze(&self) -> Result<GazeConfig> {
        GazeConfig::new(self.awareness.tau_r_deg).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn aggregation(&self) -> Result<Aggregation> {
        self.awareness.aggregation.parse().map_err(Error::Config)
    }

    pub fn blur_params(&self) -> Result<BlurParams> {
        BlurParams::new(self.blur.kernel_size, self.blur.sigma).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn enlarge_mode(&self) -> Result<EnlargeMode> {
        match (self.blur.enlarge.as_str(), self.blur.pad_fraction) {
            ("coordinate_fifth", _) => Ok(EnlargeMode::CoordinateFifth),
            ("pad_fraction", Some(f)) => Ok(EnlargeMode::PadFractionOfBox(f)),
            ("pad_fraction", None) => Err(Error::Config("blur.pad_fraction is required for enlarge = \"pad_fraction\"".into())),
            (other, _) => Err(Error::Config(format!("unknown blur.enlarge '{other}'"))),
        }
    }

    pub fn ranges(&self) -> Result<AugmentationRanges> {
        let a = &self.augment;
        let iv = |p: [f64; 2]| Interval::new(p[0], p[1]);
        let r = AugmentationRanges {
            rotation_deg: iv(a.rotation_deg),
            brightness: iv(a.brightness),
            scale: iv(a.scale),
            translate_x: iv(a.translate_x),
            translate_y: iv(a.translate_y),
            flip_horizontal: a.flip_horizontal,
            flip_vertical: a.flip_vertical,
            contrast: a.contrast.map(iv),
            saturation: a.saturation.map(iv),
            hue_deg: a.hue_deg.map(iv),
        };
        r.check().map_err(|e| Error::Config(e.to_string()))?;
        Ok(r)
    }

    pub fn interpolation(&self) -> Result<Interpolation> {
        match self.eval.interpolation.as_str() {
            "all_point" => Ok(Interpolation::AllPoint),
            "eleven_point" => Ok(Interpolation::ElevenPoint),
            other => Err(Error::Config(format!("unknown eval.interpolation '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_library_defaults() {
        let cfg = PipelineConfig::parse("").unwrap();
        assert_eq!(cfg.ranges().unwrap(), AugmentationRanges::default());
        assert_eq!(cfg.blur_params().unwrap(), BlurParams::default());
        assert_eq!(cfg.gaze().unwrap(), GazeConfig::default());
        assert_eq!(cfg.aggregation().unwrap(), Aggregation::Poi);
        assert_eq!(cfg.augment.per_image, 10);
        cfg.validate().unwrap();
    }

    #[test]
    fn sections_parse() {
        let cfg = PipelineConfig::parse(
            "seed = 3\n[blur]\nkernel_size = 7\nsigma = 2.0\n[augment]\nrotation_deg = [0.0, 10.0]\ncontrast = [0.9, 1.1]\n[eval]\ninterpolation = \"eleven_point\"\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.blur_params().unwrap(), BlurParams::new(7, 2.0).unwrap());
        assert_eq!(cfg.ranges().unwrap().contrast, Some(Interval::new(0.9, 1.1)));
        assert_eq!(cfg.interpolation().unwrap(), Interpolation::ElevenPoint);
    }

    #[test]
    fn invalid_configs() {
        assert!(PipelineConfig::parse("bogus = 1").is_err());
        assert!(PipelineConfig::parse("[blur]\nkernel_size = 4").unwrap().validate().is_err());
        assert!(PipelineConfig::parse("[awareness]\naggregation = \"max\"").unwrap().validate().is_err());
        assert!(PipelineConfig::parse("[providers]\ndetections = \"/no/such/file\"").unwrap().validate().is_err());
        assert!(PipelineConfig::parse("[blur]\nenlarge = \"pad_fraction\"").unwrap().validate().is_err());
    }

    #[test]
    fn relative_paths_rebased() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("d.jsonl"), "").unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, "[providers]\ndetections = \"d.jsonl\"\n").unwrap();
        let cfg = PipelineConfig::load(&p).unwrap();
        assert_eq!(cfg.providers.detections.unwrap(), dir.path().join("d.jsonl"));
    }
}
