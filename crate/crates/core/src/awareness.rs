//! Awareness of the person of interest from head yaw, eye-open and smile
//! probabilities.
//!
//! Angles are degrees throughout; the straight angle (180 degrees) plays the
//! role of pi in the normalisation of the rotational factor.

use crate::error::{Error, Result};
use crate::model::{AwarenessWeights, FaceObservation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeConfig {
    /// Yaw tolerance below which the head counts as facing the camera.
    pub tau_r_deg: f64,
    pub straight_angle_deg: f64,
}

impl Default for GazeConfig {
    fn default() -> Self {
        GazeConfig { tau_r_deg: 10.0, straight_angle_deg: 180.0 }
    }
}

impl GazeConfig {
    pub fn new(tau_r_deg: f64) -> Result<Self> {
        let cfg = GazeConfig { tau_r_deg, ..Default::default() };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.tau_r_deg > 0.0 && self.tau_r_deg < self.straight_angle_deg && self.straight_angle_deg.is_finite()) {
            return Err(Error::InvalidGazeConfig);
        }
        Ok(())
    }
}

/// Relative rotational factor:
/// `(|h_y| - 2|tau_r|) / (180 - |tau_r|)` when `|h_y| > |tau_r|`, else 0.
///
/// Values between `tau_r` and `2 tau_r` are negative and are not clamped.
pub fn rotational_factor(head_yaw_deg: f64, cfg: &GazeConfig) -> f64 {
    let yaw = libm::fabs(head_yaw_deg);
    let tau = libm::fabs(cfg.tau_r_deg);
    if yaw > tau {
        (yaw - 2.0 * tau) / (cfg.straight_angle_deg - tau)
    } else {
        0.0
    }
}

/// The three regressors of the awareness score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwarenessFeatures {
    pub one_minus_fr: f64,
    pub mean_eye_open: f64,
    pub p_smile: f64,
}

impl AwarenessFeatures {
    pub fn from_observation(obs: &FaceObservation, cfg: &GazeConfig) -> Self {
        AwarenessFeatures {
            one_minus_fr: 1.0 - rotational_factor(obs.head_yaw_deg, cfg),
            mean_eye_open: (obs.p_eye_left + obs.p_eye_right) / 2.0,
            p_smile: obs.p_smile,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.one_minus_fr, self.mean_eye_open, self.p_smile]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    /// Linear score `w_r x_r + w_e x_e + w_s x_s + C`.
    pub fn score(&self, w: &AwarenessWeights) -> f64 {
        w.w_r * self.one_minus_fr + w.w_e * self.mean_eye_open + w.w_s * self.p_smile + w.bias_c
    }
}

pub fn awareness_score(obs: &FaceObservation, weights: &AwarenessWeights, cfg: &GazeConfig) -> f64 {
    AwarenessFeatures::from_observation(obs, cfg).score(weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Awareness {
    Aware,
    NotAware,
}

impl Awareness {
    pub fn is_aware(self) -> bool {
        self == Awareness::Aware
    }
}

/// `Aware` iff the score is strictly positive; a score of exactly 0 (or NaN)
/// is `NotAware`.
pub fn classify_awareness(score: f64) -> Awareness {
    if score > 0.0 {
        Awareness::Aware
    } else {
        Awareness::NotAware
    }
}

/// How per-face scores of one image collapse to a single score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Min,
    Avg,
    /// The list holds only the person of interest's score.
    Poi,
}

impl Aggregation {
    pub fn label(self) -> &'static str {
        match self {
            Aggregation::Min => "min",
            Aggregation::Avg => "avg",
            Aggregation::Poi => "poi",
        }
    }
}

impl core::str::FromStr for Aggregation {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "min" => Ok(Aggregation::Min),
            "avg" => Ok(Aggregation::Avg),
            "poi" => Ok(Aggregation::Poi),
            other => Err(alloc::format!("unknown aggregation '{other}' (expected min, avg or poi)")),
        }
    }
}

pub fn aggregate_scores(scores: &[f64], mode: Aggregation) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    match mode {
        Aggregation::Min => Ok(scores.iter().copied().fold(f64::INFINITY, f64::min)),
        Aggregation::Avg => Ok(scores.iter().sum::<f64>() / scores.len() as f64),
        Aggregation::Poi if scores.len() == 1 => Ok(scores[0]),
        Aggregation::Poi => Err(Error::PoiArity(scores.len())),
    }
}
