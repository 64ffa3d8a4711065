use std::path::{Path, PathBuf};

use egoseg_core::compositor::{file_index, FOREGROUND_PREFIX, GROUNDTRUTH_PREFIX};
use egoseg_core::io::{load_rgb, save_mask, save_rgb};
use egoseg_core::{extract_groundtruth, mask_foreground, qc_screen, select_frames, QcRule};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{file_name, image_files, write_json};
use crate::config::RunConfig;
use crate::error::{create_dir, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameVerdict {
    pub index: u64,
    pub frame: String,
    pub accepted: bool,
    pub reasons: Vec<QcRule>,
    pub foreground_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFailure {
    pub index: u64,
    pub frame: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    pub frames_total: usize,
    pub frames_selected: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub failed: usize,
    pub verdicts: Vec<FrameVerdict>,
    /// Indices of rejected frames, for manual review.
    pub review: Vec<u64>,
    pub failures: Vec<FrameFailure>,
    pub config: serde_json::Value,
}

/// Frames of `dir` ordered by the index embedded in their file name.
pub fn indexed_frames(dir: &Path) -> CliResult<Vec<(u64, PathBuf)>> {
    let mut frames: Vec<(u64, PathBuf)> = image_files(dir)?
        .into_iter()
        .filter_map(|p| file_index(&p).map(|i| (i, p)))
        .collect();
    frames.sort();
    frames.dedup_by_key(|(i, _)| *i);
    Ok(frames)
}

enum FrameOutcome {
    Done(FrameVerdict),
    Failed(FrameFailure),
}

fn process_frame(
    index: u64,
    path: &Path,
    out_dir: &Path,
    cfg: &RunConfig,
) -> CliResult<FrameOutcome> {
    let image = match load_rgb(path) {
        Ok(img) => img,
        Err(e) => {
            return Ok(FrameOutcome::Failed(FrameFailure {
                index,
                frame: file_name(path),
                error: e.to_string(),
            }))
        }
    };
    let morph = cfg.morph.for_frame(image.width(), image.height());
    let gt = extract_groundtruth(&image, &cfg.chroma, &morph);
    let fg = mask_foreground(&image, &gt)?;
    save_mask(
        &out_dir.join(format!("{GROUNDTRUTH_PREFIX}{index:06}.png")),
        &gt,
    )?;
    save_rgb(
        &out_dir.join(format!("{FOREGROUND_PREFIX}{index:06}.png")),
        &fg,
    )?;
    let verdict = qc_screen(&gt, &cfg.qc);
    Ok(FrameOutcome::Done(FrameVerdict {
        index,
        frame: file_name(path),
        accepted: verdict.accepted,
        reasons: verdict.reasons,
        foreground_fraction: gt.foreground_fraction(),
    }))
}

/// Frame selection, groundtruth extraction, foreground masking and QC for
/// a directory of chroma-key frames. Writes `gt_<index>.png`,
/// `fg_<index>.png` and `qc_report.json` into `out_dir`.
pub fn run(frames_dir: &Path, out_dir: &Path, cfg: &RunConfig) -> CliResult<QcReport> {
    if !frames_dir.is_dir() {
        return Err(CliError::Io(format!(
            "{}: frames directory not found",
            frames_dir.display()
        )));
    }
    create_dir(&out_dir.to_path_buf())?;
    let frames = indexed_frames(frames_dir)?;
    let picks = select_frames(frames.len(), cfg.extract.stride)?;
    let selected: Vec<&(u64, PathBuf)> = picks.iter().map(|&i| &frames[i]).collect();
    info!(
        "extract: {} of {} frames selected (stride {})",
        selected.len(),
        frames.len(),
        cfg.extract.stride
    );

    let outcomes = cfg.install(|| {
        selected
            .par_iter()
            .map(|(index, path)| process_frame(*index, path, out_dir, cfg))
            .collect::<CliResult<Vec<_>>>()
    })??;

    let mut verdicts = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            FrameOutcome::Done(v) => verdicts.push(v),
            FrameOutcome::Failed(f) => {
                warn!("frame {}: {}", f.frame, f.error);
                failures.push(f);
            }
        }
    }
    let review: Vec<u64> = verdicts
        .iter()
        .filter(|v| !v.accepted)
        .map(|v| v.index)
        .collect();
    let report = QcReport {
        frames_total: frames.len(),
        frames_selected: selected.len(),
        accepted: verdicts.len() - review.len(),
        rejected: review.len(),
        failed: failures.len(),
        verdicts,
        review,
        failures,
        config: cfg.echo(),
    };
    write_json(&out_dir.join("qc_report.json"), &report)?;
    Ok(report)
}
