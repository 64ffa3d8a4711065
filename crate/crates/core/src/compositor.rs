//! Semi-synthetic dataset assembly: a pool of square backgrounds, hard or
//! feathered compositing, and the per-sample manifest.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chroma::{qc_screen, QcConfig, QcRule};
use crate::error::{Error, Result};
use crate::io::{image_dimensions, load_mask, load_rgb, save_mask, save_rgb};
use crate::raster::{BinaryMask, RgbImage};
use crate::resize::{resize_image, ResizeMode};

#[derive(Debug, Clone)]
pub struct BackgroundEntry {
    pub source: PathBuf,
    pub image: RgbImage,
}

impl BackgroundEntry {
    /// File name of the source, used as the manifest's `background_source`.
    pub fn source_name(&self) -> String {
        self.source
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.source.display().to_string())
    }
}

#[derive(Debug, Clone)]
pub struct BackgroundPool {
    entries: Vec<BackgroundEntry>,
    target_size: u32,
}

impl BackgroundPool {
    /// Builds a pool from already-loaded images; non-square sources are skipped.
    pub fn from_images(
        sources: impl IntoIterator<Item = (PathBuf, RgbImage)>,
        target_size: u32,
    ) -> Result<Self> {
        if target_size == 0 {
            return Err(Error::param("target_size", "must be at least 1"));
        }
        let mut entries = Vec::new();
        for (source, img) in sources {
            if img.width() != img.height() {
                continue;
            }
            let image = resize_image(&img, target_size, target_size, ResizeMode::Bilinear)?;
            entries.push(BackgroundEntry { source, image });
        }
        if entries.is_empty() {
            return Err(Error::EmptyBackgroundPool(PathBuf::new()));
        }
        Ok(Self {
            entries,
            target_size,
        })
    }

    pub fn entries(&self) -> &[BackgroundEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn target_size(&self) -> u32 {
        self.target_size
    }
}

pub fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Admits only square images from `source_dir`, each resized (bilinear) to
/// `target_size x target_size`, in lexicographic file order.
pub fn prepare_backgrounds(source_dir: &Path, target_size: u32) -> Result<BackgroundPool> {
    if target_size == 0 {
        return Err(Error::param("target_size", "must be at least 1"));
    }
    let mut entries = Vec::new();
    for path in sorted_files(source_dir)? {
        let (w, h) = match image_dimensions(&path) {
            Ok(d) => d,
            Err(e) => {
                warn!("skipping unreadable background {}: {e}", path.display());
                continue;
            }
        };
        if w != h {
            debug!(
                "skipping non-square background {} ({w}x{h})",
                path.display()
            );
            continue;
        }
        let img = match load_rgb(&path) {
            Ok(img) => img,
            Err(e) => {
                warn!("skipping unreadable background {}: {e}", path.display());
                continue;
            }
        };
        let image = resize_image(&img, target_size, target_size, ResizeMode::Bilinear)?;
        entries.push(BackgroundEntry {
            source: path,
            image,
        });
    }
    if entries.is_empty() {
        return Err(Error::EmptyBackgroundPool(source_dir.to_path_buf()));
    }
    Ok(BackgroundPool {
        entries,
        target_size,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompositeConfig {
    pub seed: u64,
    /// Width in pixels of the alpha ramp inside the mask edge; 0 is a hard matte.
    pub feather_radius: u32,
    /// Backgrounds drawn per foreground.
    pub copies: u32,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            feather_radius: 0,
            copies: 1,
        }
    }
}

impl CompositeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.copies == 0 {
            return Err(Error::param("copies", "must be at least 1"));
        }
        Ok(())
    }
}

/// Alpha per pixel: 0 outside the mask, `min(1, d / radius)` inside, where
/// `d` is the Euclidean distance to the nearest background pixel.
pub fn feather_alpha(mask: &BinaryMask, radius: u32) -> Vec<f64> {
    let (w, h) = mask.dimensions();
    let r = radius as i64;
    let mut alpha = vec![0.0; mask.pixel_count()];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !mask.get(x as u32, y as u32) {
                continue;
            }
            let mut best = i64::MAX;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (sx, sy) = (x + dx, y + dy);
                    if sx < 0 || sy < 0 || sx >= w as i64 || sy >= h as i64 {
                        continue;
                    }
                    if !mask.get(sx as u32, sy as u32) {
                        best = best.min(dx * dx + dy * dy);
                    }
                }
            }
            let d = if best == i64::MAX {
                f64::INFINITY
            } else {
                (best as f64).sqrt()
            };
            alpha[(y * w as i64 + x) as usize] = (d / radius as f64).min(1.0);
        }
    }
    alpha
}

pub fn composite(
    foreground: &RgbImage,
    mask: &BinaryMask,
    background: &RgbImage,
    config: &CompositeConfig,
) -> Result<RgbImage> {
    let (fd, md, bd) = (
        foreground.dimensions(),
        mask.dimensions(),
        background.dimensions(),
    );
    if fd != md || fd != bd {
        return Err(Error::DimensionMismatch(format!(
            "foreground is {}x{}, mask is {}x{}, background is {}x{}",
            fd.0, fd.1, md.0, md.1, bd.0, bd.1
        )));
    }
    let fg = foreground.as_raw();
    let bg = background.as_raw();
    let mut out = Vec::with_capacity(fg.len());
    if config.feather_radius == 0 {
        for (i, &m) in mask.labels().iter().enumerate() {
            let src = if m { fg } else { bg };
            out.extend_from_slice(&src[i * 3..i * 3 + 3]);
        }
    } else {
        let alpha = feather_alpha(mask, config.feather_radius);
        for (i, a) in alpha.into_iter().enumerate() {
            for c in 0..3 {
                let v = a * fg[i * 3 + c] as f64 + (1.0 - a) * bg[i * 3 + c] as f64;
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RgbImage::from_raw(fd.0, fd.1, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArmPose {
    CloseHands,
    OpenPalm,
    OpenDorsum,
    LeftArm,
    RightArm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Indoors,
    Outdoors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outfit {
    Outfit1,
    Outfit2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sleeve {
    Long,
    Short,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ethnicity {
    Caucasian,
    Black,
    Mixed,
}

/// Capture attributes of one recording session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureMetadata {
    pub subject_id: String,
    pub gender: Gender,
    pub arm_pose: ArmPose,
    pub scenario: Scenario,
    pub outfit: Outfit,
    pub sleeve: Sleeve,
    pub ethnicity: Ethnicity,
}

impl CaptureMetadata {
    pub fn validate(&self) -> Result<()> {
        if self.subject_id.trim().is_empty() {
            return Err(Error::param("subject_id", "must not be empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleManifest {
    pub sample_id: String,
    pub image_path: String,
    pub mask_path: String,
    pub background_source: String,
    pub subject_id: String,
    pub gender: Gender,
    pub arm_pose: ArmPose,
    pub scenario: Scenario,
    pub outfit: Outfit,
    pub sleeve: Sleeve,
    pub ethnicity: Ethnicity,
}

/// Parses and checks one manifest line; unknown enum values are rejected.
pub fn parse_manifest_line(line: &str) -> Result<SampleManifest> {
    let m: SampleManifest = serde_json::from_str(line)?;
    if m.sample_id.is_empty() {
        return Err(Error::param("sample_id", "must not be empty"));
    }
    Ok(m)
}

/// Reads a whole manifest, enforcing `sample_id` uniqueness.
pub fn read_manifest(path: &Path) -> Result<Vec<SampleManifest>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let m = parse_manifest_line(line)?;
        if !seen.insert(m.sample_id.clone()) {
            return Err(Error::param(
                "sample_id",
                format!("duplicate id {}", m.sample_id),
            ));
        }
        out.push(m);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedSample {
    pub index: u64,
    pub foreground: String,
    pub mask: String,
    pub reasons: Vec<QcRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingSample {
    pub index: u64,
    pub foreground: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub input_foregrounds: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub missing: usize,
    pub manifest_entries: usize,
    pub background_pool_size: usize,
    pub seed: u64,
    pub composite: CompositeConfig,
    pub qc: QcConfig,
    pub rejected_samples: Vec<RejectedSample>,
    pub missing_samples: Vec<MissingSample>,
    pub config: serde_json::Value,
}

/// Last run of ASCII digits in the file stem, e.g. `fg_000125.png` -> 125.
pub fn file_index(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let end = stem.rfind(|c: char| c.is_ascii_digit())? + 1;
    let start = stem[..end]
        .rfind(|c: char| !c.is_ascii_digit())
        .map_or(0, |i| i + 1);
    stem[start..end].parse().ok()
}

/// Filename prefix of masked foregrounds written by the extraction stage.
pub const FOREGROUND_PREFIX: &str = "fg_";
/// Filename prefix of groundtruth masks written by the extraction stage.
pub const GROUNDTRUTH_PREFIX: &str = "gt_";

/// Files of `dir` whose name starts with `prefix`, keyed by numeric index.
/// Later duplicates are ignored.
pub fn indexed_files(dir: &Path, prefix: &str) -> Result<BTreeMap<u64, PathBuf>> {
    let mut out = BTreeMap::new();
    for path in sorted_files(dir)? {
        let name = display_name(&path);
        if !name.starts_with(prefix) {
            continue;
        }
        match file_index(&path) {
            Some(i) => match out.entry(i) {
                Entry::Occupied(_) => {
                    warn!(
                        "duplicate index {i} in {}, ignoring {}",
                        dir.display(),
                        path.display()
                    );
                }
                Entry::Vacant(slot) => {
                    slot.insert(path);
                }
            },
            None => debug!("ignoring unindexed file {}", path.display()),
        }
    }
    Ok(out)
}

/// Pool indices for each copy of foreground `index`. Each index has its own
/// ChaCha stream, so assignments do not depend on which other samples exist.
pub fn assign_backgrounds(seed: u64, index: u64, copies: u32, pool_len: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..copies).map(|_| rng.random_range(0..pool_len)).collect()
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

enum Outcome {
    Accepted(Vec<SampleManifest>),
    Rejected(RejectedSample),
    Missing(MissingSample),
}

fn build_one(
    index: u64,
    fg_path: &Path,
    mask_path: Option<&PathBuf>,
    ctx: &BuildContext<'_>,
) -> Result<Outcome> {
    let missing = |reason: String| {
        Ok(Outcome::Missing(MissingSample {
            index,
            foreground: display_name(fg_path),
            reason,
        }))
    };
    let Some(mask_path) = mask_path else {
        return missing("no mask with this index".into());
    };
    let mask = match load_mask(mask_path) {
        Ok(m) => m,
        Err(e) => return missing(format!("mask unreadable: {e}")),
    };
    let verdict = qc_screen(&mask, ctx.qc);
    if !verdict.accepted {
        return Ok(Outcome::Rejected(RejectedSample {
            index,
            foreground: display_name(fg_path),
            mask: display_name(mask_path),
            reasons: verdict.reasons,
        }));
    }
    let fg = match load_rgb(fg_path) {
        Ok(f) => f,
        Err(e) => return missing(format!("foreground unreadable: {e}")),
    };
    let picks = assign_backgrounds(ctx.config.seed, index, ctx.config.copies, ctx.pool.len());
    let mut samples = Vec::with_capacity(picks.len());
    for (copy, pick) in picks.into_iter().enumerate() {
        let bg = &ctx.pool.entries()[pick];
        let image = match composite(&fg, &mask, &bg.image, ctx.config) {
            Ok(img) => img,
            Err(e) => return missing(e.to_string()),
        };
        let sample_id = format!("{}_{:06}_{}", ctx.metadata.subject_id, index, copy);
        let image_rel = format!("images/{sample_id}.png");
        let mask_rel = format!("masks/{sample_id}.png");
        save_rgb(&ctx.out_dir.join(&image_rel), &image)?;
        save_mask(&ctx.out_dir.join(&mask_rel), &mask)?;
        let m = ctx.metadata;
        samples.push(SampleManifest {
            sample_id,
            image_path: image_rel,
            mask_path: mask_rel,
            background_source: bg.source_name(),
            subject_id: m.subject_id.clone(),
            gender: m.gender,
            arm_pose: m.arm_pose,
            scenario: m.scenario,
            outfit: m.outfit,
            sleeve: m.sleeve,
            ethnicity: m.ethnicity,
        });
    }
    Ok(Outcome::Accepted(samples))
}

struct BuildContext<'a> {
    pool: &'a BackgroundPool,
    metadata: &'a CaptureMetadata,
    config: &'a CompositeConfig,
    qc: &'a QcConfig,
    out_dir: &'a Path,
}

/// Composites every `fg_<index>` image of `fg_dir` with the `gt_<index>`
/// mask of `mask_dir` and writes `images/`, `masks/`, `rejected/`,
/// `manifest.jsonl` and `build_report.json` under `out_dir`.
///
/// Samples run in parallel on the ambient rayon pool; all listings are
/// written in index order.
#[allow(clippy::too_many_arguments)]
pub fn build_dataset(
    fg_dir: &Path,
    mask_dir: &Path,
    pool: &BackgroundPool,
    metadata: &CaptureMetadata,
    config: &CompositeConfig,
    qc: &QcConfig,
    out_dir: &Path,
    config_echo: serde_json::Value,
) -> Result<BuildReport> {
    metadata.validate()?;
    config.validate()?;
    qc.validate()?;
    if pool.is_empty() {
        return Err(Error::EmptyBackgroundPool(PathBuf::new()));
    }
    let foregrounds = indexed_files(fg_dir, FOREGROUND_PREFIX)?;
    let masks = indexed_files(mask_dir, GROUNDTRUTH_PREFIX)?;
    for sub in ["images", "masks", "rejected"] {
        let d = out_dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let ctx = BuildContext {
        pool,
        metadata,
        config,
        qc,
        out_dir,
    };
    let jobs: Vec<(u64, &PathBuf)> = foregrounds.iter().map(|(&i, p)| (i, p)).collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(index, fg)| build_one(index, fg, masks.get(&index), &ctx))
        .collect::<Result<_>>()?;

    let mut manifest = Vec::new();
    let mut rejected = Vec::new();
    let mut missing = Vec::new();
    let mut accepted = 0;
    for outcome in outcomes {
        match outcome {
            Outcome::Accepted(s) => {
                accepted += 1;
                manifest.extend(s);
            }
            Outcome::Rejected(r) => rejected.push(r),
            Outcome::Missing(m) => {
                warn!("sample {}: {}", m.index, m.reason);
                missing.push(m);
            }
        }
    }

    write_jsonl(&out_dir.join("manifest.jsonl"), &manifest)?;
    write_jsonl(&out_dir.join("rejected").join("rejected.jsonl"), &rejected)?;

    let report = BuildReport {
        input_foregrounds: foregrounds.len(),
        accepted,
        rejected: rejected.len(),
        missing: missing.len(),
        manifest_entries: manifest.len(),
        background_pool_size: pool.len(),
        seed: config.seed,
        composite: *config,
        qc: *qc,
        rejected_samples: rejected,
        missing_samples: missing,
        config: config_echo,
    };
    write_json(&out_dir.join("build_report.json"), &report)?;
    Ok(report)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fg_bg() -> (RgbImage, RgbImage) {
        let fg = RgbImage::from_fn(4, 4, |x, y| [200, 10 * x as u8, 10 * y as u8]).unwrap();
        let bg = RgbImage::from_fn(4, 4, |x, y| [5, 100 + x as u8, 100 + y as u8]).unwrap();
        (fg, bg)
    }

    #[test]
    fn hard_matte_extremes() {
        let (fg, bg) = fg_bg();
        let cfg = CompositeConfig::default();
        let all = BinaryMask::new(4, 4, true).unwrap();
        assert_eq!(composite(&fg, &all, &bg, &cfg).unwrap(), fg);
        let none = BinaryMask::new(4, 4, false).unwrap();
        assert_eq!(composite(&fg, &none, &bg, &cfg).unwrap(), bg);
    }

    #[test]
    fn left_half_matte() {
        let (fg, bg) = fg_bg();
        let mask = BinaryMask::from_fn(4, 4, |x, _| x < 2).unwrap();
        let out = composite(&fg, &mask, &bg, &CompositeConfig::default()).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let want = if x < 2 { fg.get(x, y) } else { bg.get(x, y) };
                assert_eq!(out.get(x, y), want, "({x},{y})");
            }
        }
    }

    #[test]
    fn mismatch_reports_three_sizes() {
        let fg = RgbImage::filled(4, 4, [0; 3]).unwrap();
        let bg = RgbImage::filled(5, 5, [0; 3]).unwrap();
        let mask = BinaryMask::new(4, 3, true).unwrap();
        let msg = composite(&fg, &mask, &bg, &CompositeConfig::default())
            .unwrap_err()
            .to_string();
        assert!(
            msg.contains("4x4") && msg.contains("4x3") && msg.contains("5x5"),
            "{msg}"
        );
    }

    #[test]
    fn feathered_values_lie_between_layers() {
        let fg = RgbImage::filled(12, 12, [240, 0, 100]).unwrap();
        let bg = RgbImage::filled(12, 12, [0, 200, 100]).unwrap();
        let mask = BinaryMask::from_fn(12, 12, |x, y| (2..10).contains(&x) && (2..10).contains(&y))
            .unwrap();
        let out = composite(
            &fg,
            &mask,
            &bg,
            &CompositeConfig {
                feather_radius: 3,
                ..Default::default()
            },
        )
        .unwrap();
        for y in 0..12 {
            for x in 0..12 {
                let (f, b, o) = (fg.get(x, y), bg.get(x, y), out.get(x, y));
                for c in 0..3 {
                    assert!(o[c] >= f[c].min(b[c]) && o[c] <= f[c].max(b[c]));
                }
                if !mask.get(x, y) {
                    assert_eq!(o, b);
                }
            }
        }
        // edge pixel has d = 1 -> alpha 1/3; center is fully foreground
        assert_eq!(out.get(2, 5), [80, 133, 100]);
        assert_eq!(out.get(5, 5), [240, 0, 100]);
    }

    #[test]
    fn index_parsing() {
        assert_eq!(file_index(Path::new("fg_000125.png")), Some(125));
        assert_eq!(file_index(Path::new("gt_7.png")), Some(7));
        assert_eq!(file_index(Path::new("cam2_frame_0042.png")), Some(42));
        assert_eq!(file_index(Path::new("readme.txt")), None);
    }

    #[test]
    fn assignment_is_seeded_and_in_range() {
        let a: Vec<_> = (0..20).map(|i| assign_backgrounds(42, i, 2, 3)).collect();
        let b: Vec<_> = (0..20).map(|i| assign_backgrounds(42, i, 2, 3)).collect();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&p| p < 3));
        let c: Vec<_> = (0..20).map(|i| assign_backgrounds(43, i, 2, 3)).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn manifest_schema_rejects_unknown_vocabulary() {
        let good = r#"{"sample_id":"s1_000000_0","image_path":"images/a.png","mask_path":"masks/a.png","background_source":"b.png","subject_id":"s1","gender":"female","arm_pose":"open-palm","scenario":"indoors","outfit":"outfit2","sleeve":"short","ethnicity":"mixed"}"#;
        let m = parse_manifest_line(good).unwrap();
        assert_eq!(m.arm_pose, ArmPose::OpenPalm);
        assert_eq!(serde_json::to_string(&m).unwrap(), good);
        let bad = good.replace("open-palm", "thumbs-up");
        assert!(parse_manifest_line(&bad).is_err());
        let empty = good.replace("s1_000000_0", "");
        assert!(parse_manifest_line(&empty).is_err());
    }
}
