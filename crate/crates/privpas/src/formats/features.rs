//! Training-set CSV for the awareness trainer.
//!
//! Either raw observations (`h_y_deg,p_eye_left,p_eye_right,p_smile,aware`) or
//! precomputed regressors (`one_minus_fr,mean_eye_open,p_smile,aware`). The
//! header decides which. `aware` accepts `true/false`, `yes/no` or `1/0`.

use std::path::Path;

use privpas_core::{AwarenessFeatures, FaceObservation, GazeConfig};

use crate::error::{Error, Result};

const RAW: [&str; 5] = ["h_y_deg", "p_eye_left", "p_eye_right", "p_smile", "aware"];
const PRE: [&str; 4] = ["one_minus_fr", "mean_eye_open", "p_smile", "aware"];

fn parse_label(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

pub fn parse_features(text: &str, path: &Path, gaze: &GazeConfig) -> Result<Vec<(AwarenessFeatures, bool)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> =
        rdr.headers().map_err(|e| Error::parse(path, 1, e))?.iter().map(str::to_string).collect();
    let raw = if header == RAW {
        true
    } else if header == PRE {
        false
    } else {
        return Err(Error::parse(path, 1, format!("expected header {} or {}", RAW.join(","), PRE.join(","))));
    };
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(path, line, e))?;
        let n = rec.len();
        let num = |j: usize| -> Result<f64> { rec[j].parse::<f64>().map_err(|e| Error::parse(path, line, e)) };
        let label = parse_label(&rec[n - 1]).ok_or_else(|| Error::parse(path, line, "bad aware label"))?;
        let features = if raw {
            let obs = FaceObservation::new(num(0)?, num(1)?, num(2)?, num(3)?, None)
                .map_err(|e| Error::parse(path, line, e))?;
            AwarenessFeatures::from_observation(&obs, gaze)
        } else {
            AwarenessFeatures { one_minus_fr: num(0)?, mean_eye_open: num(1)?, p_smile: num(2)? }
        };
        out.push((features, label));
    }
    Ok(out)
}

pub fn load_features(path: &Path, gaze: &GazeConfig) -> Result<Vec<(AwarenessFeatures, bool)>> {
    parse_features(&super::jsonl::read_text(path)?, path, gaze)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_and_precomputed() {
        let g = GazeConfig::default();
        let raw = "h_y_deg,p_eye_left,p_eye_right,p_smile,aware\n-62.61,0.141,0.581,0.54,no\n-1.165,0.996,0.994,0.182,yes\n";
        let d = parse_features(raw, Path::new("f.csv"), &g).unwrap();
        assert_eq!(d.len(), 2);
        assert!(!d[0].1 && d[1].1);
        assert!((d[0].0.one_minus_fr - (1.0 - 42.61 / 170.0)).abs() < 1e-12);
        let pre = "one_minus_fr,mean_eye_open,p_smile,aware\n1.0,0.9,0.1,1\n";
        assert_eq!(parse_features(pre, Path::new("f.csv"), &g).unwrap()[0].0.mean_eye_open, 0.9);
    }

    #[test]
    fn bad_inputs() {
        let g = GazeConfig::default();
        assert!(parse_features("a,b\n1,2\n", Path::new("f.csv"), &g).is_err());
        let bad = "one_minus_fr,mean_eye_open,p_smile,aware\n1.0,0.9,0.1,maybe\n";
        assert!(matches!(parse_features(bad, Path::new("f.csv"), &g), Err(Error::Parse { line: 2, .. })));
        let range = "h_y_deg,p_eye_left,p_eye_right,p_smile,aware\n0,1.5,0.5,0.5,1\n";
        assert!(parse_features(range, Path::new("f.csv"), &g).is_err());
    }
}
