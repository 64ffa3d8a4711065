use std::fs;
use std::path::{Path, PathBuf};

use egoseg_core::compositor::{
    read_manifest, ArmPose, BuildReport, Ethnicity, Gender, Outfit, Scenario, Sleeve,
};
use egoseg_core::io::{load_mask, load_rgb, save_mask, save_rgb};
use egoseg_core::{
    build_dataset, BackgroundPool, BinaryMask, CaptureMetadata, CompositeConfig, QcConfig, QcRule,
    RgbImage,
};
use tempfile::TempDir;

const SIDE: u32 = 32;

fn metadata() -> CaptureMetadata {
    CaptureMetadata {
        subject_id: "s07".into(),
        gender: Gender::Male,
        arm_pose: ArmPose::LeftArm,
        scenario: Scenario::Outdoors,
        outfit: Outfit::Outfit2,
        sleeve: Sleeve::Long,
        ethnicity: Ethnicity::Mixed,
    }
}

fn pool() -> BackgroundPool {
    let images = (0..3u8).map(|k| {
        let img = RgbImage::from_fn(16, 16, |x, y| [k * 80, x as u8 * 10, y as u8 * 10]).unwrap();
        (PathBuf::from(format!("bg_{k}.png")), img)
    });
    BackgroundPool::from_images(images, SIDE).unwrap()
}

/// Ten foregrounds: index 3 has an empty mask, index 6 touches the top
/// border, index 8 has no mask at all.
fn inputs(dir: &Path) -> (PathBuf, PathBuf) {
    let (fg, gt) = (dir.join("fg"), dir.join("gt"));
    fs::create_dir_all(&fg).unwrap();
    fs::create_dir_all(&gt).unwrap();
    for i in 0..10u32 {
        let img = RgbImage::from_fn(SIDE, SIDE, |x, y| [200, (x + i) as u8, y as u8]).unwrap();
        save_rgb(&fg.join(format!("fg_{i:06}.png")), &img).unwrap();
        let mask = match i {
            3 => BinaryMask::new(SIDE, SIDE, false).unwrap(),
            6 => BinaryMask::from_fn(SIDE, SIDE, |x, _| (10..20).contains(&x)).unwrap(),
            _ => BinaryMask::from_fn(SIDE, SIDE, |x, y| y >= 16 && (8 + i..20 + i).contains(&x))
                .unwrap(),
        };
        if i != 8 {
            save_mask(&gt.join(format!("gt_{i:06}.png")), &mask).unwrap();
        }
    }
    (fg, gt)
}

fn build(dir: &Path, out: &str, seed: u64, threads: usize) -> BuildReport {
    let (fg, gt) = inputs(dir);
    let cfg = CompositeConfig {
        seed,
        feather_radius: 2,
        copies: 2,
    };
    let rayon_pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    rayon_pool.install(|| {
        build_dataset(
            &fg,
            &gt,
            &pool(),
            &metadata(),
            &cfg,
            &QcConfig::default(),
            &dir.join(out),
            serde_json::json!({"note": "test"}),
        )
        .unwrap()
    })
}

#[test]
fn every_input_is_accounted_for() {
    let tmp = TempDir::new().unwrap();
    let report = build(tmp.path(), "out", 1, 2);
    assert_eq!(report.input_foregrounds, 10);
    assert_eq!(report.accepted, 7);
    assert_eq!(report.rejected, 2);
    assert_eq!(report.missing, 1);
    assert_eq!(
        report.accepted + report.rejected + report.missing,
        report.input_foregrounds
    );
    assert_eq!(report.manifest_entries, 14);

    let rejected: Vec<(u64, Vec<QcRule>)> = report
        .rejected_samples
        .iter()
        .map(|r| (r.index, r.reasons.clone()))
        .collect();
    assert_eq!(rejected[0], (3, vec![QcRule::FgFractionLow]));
    assert_eq!(rejected[1].0, 6);
    assert!(rejected[1].1.contains(&QcRule::TouchesTopBorder));
    assert_eq!(report.missing_samples[0].index, 8);

    let out = tmp.path().join("out");
    let manifest = read_manifest(&out.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest.len(), 14);
    assert_eq!(manifest[0].sample_id, "s07_000000_0");
    assert_eq!(manifest[1].sample_id, "s07_000000_1");
    for m in &manifest {
        assert_eq!(m.arm_pose, ArmPose::LeftArm);
        assert!(m.background_source.starts_with("bg_"));
        let img = load_rgb(&out.join(&m.image_path)).unwrap();
        let mask = load_mask(&out.join(&m.mask_path)).unwrap();
        assert_eq!(img.dimensions(), (SIDE, SIDE));
        assert_eq!(mask.dimensions(), (SIDE, SIDE));
    }
    let rejected_lines = fs::read_to_string(out.join("rejected/rejected.jsonl")).unwrap();
    assert_eq!(rejected_lines.lines().count(), 2);
    assert!(out.join("build_report.json").is_file());
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let tmp = TempDir::new().unwrap();
    build(tmp.path(), "one", 5, 1);
    build(tmp.path(), "four", 5, 4);
    for rel in [
        "manifest.jsonl",
        "build_report.json",
        "rejected/rejected.jsonl",
    ] {
        let a = fs::read(tmp.path().join("one").join(rel)).unwrap();
        let b = fs::read(tmp.path().join("four").join(rel)).unwrap();
        assert_eq!(a, b, "{rel}");
    }
    let mut images: Vec<_> = fs::read_dir(tmp.path().join("one/images"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    images.sort();
    assert_eq!(images.len(), 14);
    for name in images {
        let a = fs::read(tmp.path().join("one/images").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("four/images").join(&name)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn seed_changes_background_assignment() {
    let tmp = TempDir::new().unwrap();
    build(tmp.path(), "a", 1, 1);
    build(tmp.path(), "b", 2, 1);
    let sources = |d: &str| -> Vec<String> {
        read_manifest(&tmp.path().join(d).join("manifest.jsonl"))
            .unwrap()
            .into_iter()
            .map(|m| m.background_source)
            .collect()
    };
    assert_ne!(sources("a"), sources("b"));
}
