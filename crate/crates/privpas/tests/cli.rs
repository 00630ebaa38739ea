use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use privpas::image_io::{load_image, save_png};
use privpas_core::ImageBuffer;
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn privpas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_privpas")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_str().unwrap().to_string()
}

#[test]
fn score_reproduces_published_rows() {
    let out = privpas(&["score", "--landmarks", &fixture("landmarks.jsonl")]);
    assert!(out.status.success());
    let lines = json_lines(&String::from_utf8(out.stdout).unwrap());
    let want = [("portraits/a.jpg", 0.3397, true), ("portraits/b.jpg", -0.6609, false), ("portraits/c.jpg", 0.4887, true), ("portraits/d.jpg", -0.3309, false)];
    for (image, score, aware) in want {
        let l = lines.iter().find(|l| l["image"] == image).unwrap();
        assert!((l["score"].as_f64().unwrap() - score).abs() < 1e-3, "{image}");
        assert_eq!(l["aware"], aware);
    }
}

#[test]
fn eval_from_confusion_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = privpas(&["eval", "--out-dir", s(dir.path()), "--confusion", "objDetection=189,172,78,61", "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let c = &v["classification"][0];
    assert_eq!(c["label"], "objDetection");
    assert!((c["precision"].as_f64().unwrap() - 0.708).abs() < 5e-4);
    assert!((c["recall"].as_f64().unwrap() - 0.756).abs() < 5e-4);
    assert!((c["f1"].as_f64().unwrap() - 0.731).abs() < 5e-4);
    assert!(dir.path().join("metrics.json").exists());
    let text = String::from_utf8(privpas(&["eval", "--confusion", "113,162,88,137"]).stdout).unwrap();
    assert!(text.contains("0.562") && text.contains("0.452") && text.contains("0.501"), "{text}");
}

#[test]
fn eval_detections_and_poi_awareness() {
    let dir = tempfile::tempdir().unwrap();
    let out = privpas(&[
        "eval",
        "--out-dir",
        s(dir.path()),
        "--manifest",
        &fixture("manifest.json"),
        "--detections",
        &fixture("detections.jsonl"),
        "--landmarks",
        &fixture("landmarks.jsonl"),
        "--aggregate",
        "poi",
        "--plot",
        "--json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["detection"]["map"], 1.0);
    let c = &v["classification"][0];
    assert_eq!((c["tp"].as_u64(), c["tn"].as_u64(), c["fp"].as_u64(), c["fn"].as_u64()), (Some(2), Some(2), Some(0), Some(0)));
    for f in ["metrics.json", "pr_curves.csv", "pr_curves.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn eval_with_nothing_to_do_is_invalid() {
    assert_eq!(privpas(&["eval"]).status.code(), Some(2));
    assert_eq!(privpas(&["eval", "--confusion", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn train_weights_fits_separable_data_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sep.csv");
    let mut text = String::from("one_minus_fr,mean_eye_open,p_smile,aware\n");
    for i in 0..20 {
        let e = i as f64 / 19.0;
        text.push_str(&format!("1.0,{e},0.3,{}\n", e > 0.5));
    }
    std::fs::write(&csv, text).unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    for out in [&a, &b] {
        let r = privpas(&["train-weights", "--features", s(&csv), "--out", s(out), "--seed", "3"]);
        assert!(r.status.success());
        assert!(String::from_utf8_lossy(&r.stderr).contains("training accuracy 1.000"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let w = privpas::formats::weights::load_weights(&a).unwrap();
    assert!(w.0.w_e > 0.0);

    let rows = privpas(&["train-weights", "--features", &fixture("aware_rows.csv")]);
    assert!(String::from_utf8_lossy(&rows.stderr).contains("training accuracy 1.000"));
}

#[test]
fn train_weights_rejects_single_class() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one.csv");
    std::fs::write(&csv, "one_minus_fr,mean_eye_open,p_smile,aware\n1,0.9,0.1,yes\n1,0.8,0.2,yes\n").unwrap();
    assert_eq!(privpas(&["train-weights", "--features", s(&csv)]).status.code(), Some(2));
}

fn write_noise(path: &Path, w: usize, h: usize) -> ImageBuffer {
    let data = (0..w * h * 3).map(|i| ((i * 7919) % 251) as u8).collect();
    let img = ImageBuffer::new(w, h, 3, data).unwrap();
    save_png(&img, path).unwrap();
    img
}

#[test]
fn anonymize_without_faces_keeps_pixels() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in");
    let img = write_noise(&src.join("p.png"), 20, 16);
    let faces = dir.path().join("faces.jsonl");
    std::fs::write(&faces, "{\"image\": \"p.png\", \"faces\": []}\n").unwrap();
    let out = dir.path().join("out");
    let r = Command::new(env!("CARGO_BIN_EXE_privpas"))
        .current_dir(&src)
        .args(["anonymize", "p.png", "--faces", s(&faces), "--out-dir", s(&out)])
        .output()
        .unwrap();
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(load_image(&out.join("p.png")).unwrap(), img);
    assert!(out.join("anonymize.jsonl").exists());
}

#[test]
fn anonymize_blurs_only_the_enlarged_face() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in");
    let img = write_noise(&src.join("portrait.png"), 80, 60);
    let faces = dir.path().join("faces.jsonl");
    std::fs::write(
        &faces,
        "{\"image\": \"portrait.png\", \"faces\": [{\"h_y_deg\": 0, \"p_eye_left\": 1, \"p_eye_right\": 1, \"p_smile\": 0, \"box\": [30, 20, 45, 35]}]}\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = Command::new(env!("CARGO_BIN_EXE_privpas"))
        .current_dir(&src)
        .args(["anonymize", "portrait.png", "--faces", s(&faces), "--out-dir", s(&out)])
        .output()
        .unwrap();
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let got = load_image(&out.join("portrait.png")).unwrap();
    // enlarged to (24, 16, 54, 42)
    let mut changed_inside = 0;
    for y in 0..60 {
        for x in 0..80 {
            let inside = (24..54).contains(&x) && (16..42).contains(&y);
            if inside {
                changed_inside += (got.pixel(x, y) != img.pixel(x, y)) as usize;
            } else {
                assert_eq!(got.pixel(x, y), img.pixel(x, y), "({x},{y})");
            }
        }
    }
    assert!(changed_inside > 0);
}

#[test]
fn anonymize_missing_face_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write_noise(&dir.path().join("p.png"), 8, 8);
    let r = privpas(&["anonymize", s(&dir.path().join("p.png")), "--faces", "/nonexistent/faces.jsonl", "--out-dir", s(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn augment_writes_manifest_and_images() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    write_noise(&data.join("a.png"), 24, 18);
    write_noise(&data.join("b.png"), 24, 18);
    let record = |name: &str| {
        format!("{{\"image\": \"{name}\", \"split\": \"train\", \"annotations\": [{{\"class\": \"uses_crutches\", \"box\": [4, 3, 12, 14], \"sensitive\": true}}]}}")
    };
    let manifest = data.join("manifest.json");
    std::fs::write(&manifest, format!("{{\"records\": [{}, {}, {}]}}", record("a.png"), record("b.png"), record("gone.png"))).unwrap();
    let run = |out: &Path| {
        let r = privpas(&["augment", "--manifest", s(&manifest), "--per-image", "3", "--seed", "5", "--out-dir", s(out)]);
        // one source image is missing
        assert_eq!(r.status.code(), Some(1), "{}", String::from_utf8_lossy(&r.stderr));
        std::fs::read_to_string(out.join("manifest.json")).unwrap()
    };
    let (o1, o2) = (dir.path().join("o1"), dir.path().join("o2"));
    let (m1, m2) = (run(&o1), run(&o2));
    let v: Value = serde_json::from_str(&m1).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 8);
    assert!(o1.join("a_aug00.png").exists() && o1.join("b_aug02.png").exists());
    assert_eq!(m1.replace(s(&o1), ""), m2.replace(s(&o2), ""));
    assert_eq!(std::fs::read(o1.join("a_aug01.png")).unwrap(), std::fs::read(o2.join("a_aug01.png")).unwrap());
}

#[test]
fn pipeline_writes_annotated_images() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    write_noise(&data.join("portraits/b.jpg.png"), 300, 330);
    let manifest = data.join("manifest.json");
    std::fs::write(&manifest, "{\"records\": [{\"image\": \"portraits/b.jpg.png\", \"annotations\": [{\"class\": \"uses_crutches\", \"box\": [60, 20, 180, 310], \"sensitive\": true}]}]}").unwrap();
    let dets = dir.path().join("d.jsonl");
    std::fs::write(&dets, "{\"image\": \"portraits/b.jpg.png\", \"detections\": [{\"class\": \"uses_crutches\", \"box\": [60, 20, 180, 310], \"confidence\": 0.8}]}\n").unwrap();
    let out = dir.path().join("out");
    let r = privpas(&[
        "pipeline",
        "--manifest",
        s(&manifest),
        "--detections",
        s(&dets),
        "--landmarks",
        &fixture("landmarks.jsonl"),
        "--out-dir",
        s(&out),
        "--emit-annotated",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let d = json_lines(&std::fs::read_to_string(out.join("decisions.jsonl")).unwrap());
    // no landmarks for this image: the POI counts as not aware
    assert_eq!(d[0]["cue"], true);
    assert_eq!(d[0]["sensitive"], true);
    let annotated = load_image(&out.join("annotated/b.jpg.png")).unwrap();
    assert_eq!(annotated.pixel(150, 2), &[220, 20, 60]);
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(privpas(&["frobnicate"]).status.code(), Some(2));
}
