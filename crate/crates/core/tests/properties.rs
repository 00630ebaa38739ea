use std::collections::BTreeMap;

use privpas_core::augmentor::{transform_box, ImageStore};
use privpas_core::trainer::train_weights_traced;
use privpas_core::{
    anonymize_image, augment_dataset, awareness_score, classify_awareness, enlarge_box, sample_augmentation,
    transform_image, AccessibilityClass, Annotation, AugmentationRanges, AugmentationSample, AwarenessFeatures,
    AwarenessWeights, BlurParams, BoundingBox, DatasetManifest, FaceObservation, GazeConfig, ImageBuffer,
    ManifestRecord, TrainParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(rng: &mut ChaCha8Rng, w: usize, h: usize, ch: u8) -> ImageBuffer {
    ImageBuffer::new(w, h, ch, (0..w * h * ch as usize).map(|_| rng.gen()).collect()).unwrap()
}

#[test]
fn anonymize_touches_only_enlarged_faces() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..30 {
        let (w, h) = (rng.gen_range(30..90), rng.gen_range(30..90));
        let img = noise(&mut rng, w, h, 3);
        let faces: Vec<BoundingBox> = (0..rng.gen_range(1..3))
            .map(|_| {
                let x1 = rng.gen_range(0.0..w as f64 * 0.6);
                let y1 = rng.gen_range(0.0..h as f64 * 0.6);
                BoundingBox::new(x1, y1, x1 + rng.gen_range(3.0..15.0), y1 + rng.gen_range(3.0..15.0)).unwrap()
            })
            .collect();
        let out = anonymize_image(&img, &faces, &BlurParams::new(7, 3.0).unwrap()).unwrap();
        let spans: Vec<_> =
            faces.iter().map(|f| enlarge_box(*f, w as f64, h as f64).unwrap().pixel_span(w, h)).collect();
        for y in 0..h {
            for x in 0..w {
                let inside = spans.iter().any(|&(x0, y0, x1, y1)| x >= x0 && x < x1 && y >= y0 && y < y1);
                if !inside {
                    assert_eq!(out.pixel(x, y), img.pixel(x, y), "pixel ({x},{y}) changed");
                }
            }
        }
    }
}

#[test]
fn blur_reduces_variance_inside_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let img = noise(&mut rng, 64, 64, 1);
    let face = BoundingBox::new(20.0, 20.0, 40.0, 40.0).unwrap();
    let out = anonymize_image(&img, &[face], &BlurParams::default()).unwrap();
    let (x0, y0, x1, y1) = enlarge_box(face, 64.0, 64.0).unwrap().pixel_span(64, 64);
    let var = |im: &ImageBuffer| {
        let v: Vec<f64> = (y0..y1).flat_map(|y| (x0..x1).map(move |x| (x, y))).map(|(x, y)| im.pixel(x, y)[0] as f64).collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / v.len() as f64
    };
    assert!(var(&out) < 0.1 * var(&img), "{} vs {}", var(&out), var(&img));
}

fn white_rect(w: usize, h: usize, r: (usize, usize, usize, usize)) -> ImageBuffer {
    let mut img = ImageBuffer::filled(w, h, 1, 0).unwrap();
    for y in r.1..r.3 {
        for x in r.0..r.2 {
            img.pixel_mut(x, y)[0] = 255;
        }
    }
    img
}

/// Share of bright pixels (at least half the scaled white level) whose centre
/// lies inside `b`.
fn containment(img: &ImageBuffer, b: &BoundingBox, level: f64) -> Option<f64> {
    let (mut total, mut inside) = (0usize, 0usize);
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.pixel(x, y)[0] as f64 >= 0.5 * level {
                total += 1;
                if b.contains_point(x as f64 + 0.5, y as f64 + 0.5) {
                    inside += 1;
                }
            }
        }
    }
    (total > 0).then(|| inside as f64 / total as f64)
}

#[test]
fn white_rectangle_stays_inside_its_box() {
    let ranges = AugmentationRanges::default();
    let (w, h) = (96, 72);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..100 {
        let x0 = rng.gen_range(10..50);
        let y0 = rng.gen_range(10..40);
        let rect = (x0, y0, x0 + rng.gen_range(8..30), y0 + rng.gen_range(8..25));
        let img = white_rect(w, h, rect);
        let s = sample_augmentation(&ranges, seed).unwrap();
        let b = BoundingBox::new(rect.0 as f64, rect.1 as f64, rect.2 as f64, rect.3 as f64).unwrap();
        let out = transform_image(&img, &s);
        let hull = transform_box(&b, &s, w as f64, h as f64);
        if let Some(c) = containment(&out, &hull, 255.0 * s.brightness) {
            assert!(c >= 0.99, "seed {seed}: {c} of white inside {hull:?}");
        }
    }
}

#[test]
fn axis_preserving_box_maps_are_exact() {
    let b = BoundingBox::new(10.0, 20.0, 30.0, 50.0).unwrap();
    let (w, h) = (100.0, 80.0);
    let mut s = AugmentationSample::identity();
    s.flip_h = true;
    assert_eq!(transform_box(&b, &s, w, h), BoundingBox::new(70.0, 20.0, 90.0, 50.0).unwrap());
    let mut s = AugmentationSample::identity();
    s.flip_v = true;
    assert_eq!(transform_box(&b, &s, w, h), BoundingBox::new(10.0, 30.0, 30.0, 60.0).unwrap());
    let mut s = AugmentationSample::identity();
    s.translate_x = 0.25;
    s.translate_y = -0.125;
    assert_eq!(transform_box(&b, &s, w, h), BoundingBox::new(35.0, 10.0, 55.0, 40.0).unwrap());
    let mut s = AugmentationSample::identity();
    s.scale = 0.5;
    // about the centre (50, 40)
    assert_eq!(transform_box(&b, &s, w, h), BoundingBox::new(30.0, 30.0, 40.0, 45.0).unwrap());
}

#[derive(Default)]
struct MemStore {
    images: BTreeMap<String, ImageBuffer>,
    written: BTreeMap<String, ImageBuffer>,
}

impl ImageStore for MemStore {
    fn load(&mut self, path: &str) -> Result<ImageBuffer, String> {
        self.images.get(path).cloned().ok_or_else(|| format!("{path}: not found"))
    }
    fn store(&mut self, path: &str, image: &ImageBuffer) -> Result<(), String> {
        self.written.insert(path.to_string(), image.clone());
        Ok(())
    }
}

fn small_dataset(n: usize) -> (DatasetManifest, MemStore) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut store = MemStore::default();
    let mut records = Vec::new();
    for i in 0..n {
        let name = format!("img/{i:04}.png");
        store.images.insert(name.clone(), noise(&mut rng, 12, 10, 3));
        let mut r = ManifestRecord::new(name);
        let b = BoundingBox::new(2.0, 2.0, 8.0, 7.0).unwrap();
        r.annotations.push(Annotation::new(b, AccessibilityClass::UsesCrutches, true).unwrap());
        records.push(r);
    }
    (DatasetManifest::new(records).unwrap(), store)
}

#[test]
fn augmentation_count_arithmetic() {
    let (m, mut store) = small_dataset(905);
    let out = augment_dataset(&m, &AugmentationRanges::default(), 10, 42, &mut store).unwrap();
    assert_eq!(out.manifest.len(), 9955);
    assert_eq!(out.manifest.records.iter().filter(|r| r.provenance.is_some()).count(), 9050);
    assert_eq!(store.written.len(), 9050);
    assert!(out.skipped.is_empty());
}

#[test]
fn augmentation_is_deterministic_and_skips_unreadable() {
    let (m, mut a) = small_dataset(6);
    let (_, mut b) = small_dataset(6);
    a.images.remove("img/0002.png");
    b.images.remove("img/0002.png");
    let ra = augment_dataset(&m, &AugmentationRanges::default(), 3, 7, &mut a).unwrap();
    let rb = augment_dataset(&m, &AugmentationRanges::default(), 3, 7, &mut b).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(a.written, b.written);
    assert_eq!(ra.skipped.len(), 1);
    assert_eq!(ra.manifest.len(), 5 * 4);
    let other = augment_dataset(&m, &AugmentationRanges::default(), 3, 8, &mut a).unwrap();
    assert_ne!(other.manifest, ra.manifest);
}

fn published_rows() -> Vec<(FaceObservation, bool)> {
    [
        (-1.165, 0.996, 0.994, 0.182, true),
        (-12.069, 0.195, 0.823, 0.997, false),
        (-3.582, 0.997, 0.999, 0.012, true),
        (-62.610, 0.141, 0.581, 0.540, false),
    ]
    .into_iter()
    .map(|(h, l, r, s, y)| (FaceObservation::new(h, l, r, s, None).unwrap(), y))
    .collect()
}

#[test]
fn published_weights_classify_published_rows() {
    let g = GazeConfig::default();
    for (obs, aware) in published_rows() {
        let s = awareness_score(&obs, &AwarenessWeights::PUBLISHED, &g);
        assert_eq!(classify_awareness(s).is_aware(), aware);
    }
}

#[test]
fn trained_weights_separate_published_rows() {
    let g = GazeConfig::default();
    let data: Vec<(AwarenessFeatures, bool)> =
        published_rows().iter().map(|(o, y)| (AwarenessFeatures::from_observation(o, &g), *y)).collect();
    let (w, losses) = train_weights_traced(&data, &TrainParams::default()).unwrap();
    assert!(losses.windows(2).all(|p| p[1] <= p[0]), "loss increased");
    for (x, y) in &data {
        assert_eq!(classify_awareness(x.score(&w)).is_aware(), *y);
    }
}
