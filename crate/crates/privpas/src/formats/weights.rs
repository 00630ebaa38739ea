//! Flat `key = value` weights file.
//!
//! Keys: `w_r`, `w_e`, `w_s`, `c`, `tau_r_deg`. Blank lines and lines starting
//! with `#` are ignored. Values are written with round-trip precision.

use std::path::Path;

use privpas_core::{AwarenessWeights, GazeConfig};

use crate::error::{Error, Result};

pub fn render_weights(w: &AwarenessWeights, gaze: &GazeConfig) -> String {
    format!(
        "w_r = {:?}\nw_e = {:?}\nw_s = {:?}\nc = {:?}\ntau_r_deg = {:?}\n",
        w.w_r, w.w_e, w.w_s, w.bias_c, gaze.tau_r_deg
    )
}

pub fn parse_weights(text: &str, path: &Path) -> Result<(AwarenessWeights, GazeConfig)> {
    let mut vals: [Option<f64>; 5] = [None; 5];
    const KEYS: [&str; 5] = ["w_r", "w_e", "w_s", "c", "tau_r_deg"];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(path, i + 1, "expected 'key = value'"))?;
        let slot = KEYS
            .iter()
            .position(|key| *key == k.trim())
            .ok_or_else(|| Error::parse(path, i + 1, format!("unknown key '{}'", k.trim())))?;
        let v: f64 = v.trim().parse().map_err(|e| Error::parse(path, i + 1, e))?;
        if vals[slot].replace(v).is_some() {
            return Err(Error::parse(path, i + 1, format!("duplicate key '{}'", KEYS[slot])));
        }
    }
    let get = |i: usize| vals[i].ok_or_else(|| Error::format(path, format!("missing key '{}'", KEYS[i])));
    let weights = AwarenessWeights::new(get(0)?, get(1)?, get(2)?, get(3)?).map_err(|e| Error::format(path, e))?;
    let gaze = match vals[4] {
        Some(t) => GazeConfig::new(t).map_err(|e| Error::format(path, e))?,
        None => GazeConfig::default(),
    };
    Ok((weights, gaze))
}

pub fn load_weights(path: &Path) -> Result<(AwarenessWeights, GazeConfig)> {
    parse_weights(&super::jsonl::read_text(path)?, path)
}
