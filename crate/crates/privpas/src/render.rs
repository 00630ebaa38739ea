//! Annotated decision images and PR-curve plots.

use std::fmt::Write as _;

use privpas_core::evaluator::DetectionReport;
use privpas_core::{AccessibilityClass, BoundingBox, ImageBuffer};

use crate::pipeline::CueDecision;

/// Box colours: green for crutches, pink for wheelchairs, orange for
/// structural impairment.
pub fn class_color(class: AccessibilityClass) -> [u8; 3] {
    match class {
        AccessibilityClass::UsesCrutches => [0, 200, 0],
        AccessibilityClass::UsesWheelchair => [255, 105, 180],
        AccessibilityClass::StructurallyImpaired => [255, 165, 0],
    }
}

const CUE_COLOR: [u8; 3] = [220, 20, 60];
const BORDER: usize = 3;

fn to_rgb(img: &ImageBuffer) -> ImageBuffer {
    if img.channels() == 3 {
        return img.clone();
    }
    let data = img.data().iter().flat_map(|v| [*v, *v, *v]).collect();
    ImageBuffer::new(img.width(), img.height(), 3, data).expect("same dimensions")
}

fn fill(img: &mut ImageBuffer, x0: usize, y0: usize, x1: usize, y1: usize, color: [u8; 3]) {
    for y in y0..y1.min(img.height()) {
        for x in x0..x1.min(img.width()) {
            img.pixel_mut(x, y).copy_from_slice(&color);
        }
    }
}

fn outline(img: &mut ImageBuffer, b: &BoundingBox, color: [u8; 3]) {
    let (x0, y0, x1, y1) = b.pixel_span(img.width(), img.height());
    if x1 <= x0 || y1 <= y0 {
        return;
    }
    let t = BORDER;
    fill(img, x0, y0, x1, (y0 + t).min(y1), color);
    fill(img, x0, y1.saturating_sub(t).max(y0), x1, y1, color);
    fill(img, x0, y0, (x0 + t).min(x1), y1, color);
    fill(img, x1.saturating_sub(t).max(x0), y0, x1, y1, color);
}

/// Draw each POI box in its class colour; a red banner across the top marks
/// an image that needs a consent cue.
pub fn annotate(img: &ImageBuffer, decision: &CueDecision) -> ImageBuffer {
    let mut out = to_rgb(img);
    for p in &decision.pois {
        outline(&mut out, &p.detection.bbox, class_color(p.detection.class));
    }
    if decision.cue {
        let h = (out.height() / 12).max(4);
        let w = out.width();
        fill(&mut out, 0, 0, w, h, CUE_COLOR);
    }
    out
}

/// Precision-recall curves of every class with ground truth, one polyline each.
pub fn pr_curves_svg(report: &DetectionReport) -> String {
    let (w, h, m) = (480.0, 360.0, 48.0);
    let (pw, ph) = (w - 2.0 * m, h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{m}" y="{m}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let x = m + t * pw;
        let y = m + (1.0 - t) * ph;
        let _ = writeln!(s, r#"<text x="{x}" y="{}" font-size="10" text-anchor="middle">{t:.1}</text>"#, h - m + 14.0);
        let _ = writeln!(s, r#"<text x="{}" y="{y}" font-size="10" text-anchor="end">{t:.1}</text>"#, m - 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">recall</text>"#, w / 2.0, h - 8.0);
    let _ = writeln!(s, r#"<text x="12" y="{}" font-size="12" transform="rotate(-90 12 {})" text-anchor="middle">precision</text>"#, h / 2.0, h / 2.0);
    let mut legend_y = m + 14.0;
    for c in report.classes.iter().filter(|c| c.ap.is_some()) {
        let [r, g, b] = class_color(c.class);
        let pts: Vec<String> = c
            .curve
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", m + p.recall * pw, m + (1.0 - p.precision) * ph))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="rgb({r},{g},{b})" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{legend_y}" font-size="11" fill="rgb({r},{g},{b})">{} AP {:.3}</text>"#,
            m + 8.0,
            c.class.label(),
            c.ap.unwrap_or(0.0)
        );
        legend_y += 14.0;
    }
    s.push_str("</svg>\n");
    s
}
