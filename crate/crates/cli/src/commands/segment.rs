use std::path::{Path, PathBuf};

use egoseg_core::io::{load_depth, load_mask, load_rgb, save_mask};
use egoseg_core::{depth_segment, skin_segment, BinaryMask, Error, SegmenterConfig};
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{file_name, image_files, write_json};
use crate::config::RunConfig;
use crate::error::{create_dir, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub kind: String,
    pub inputs: usize,
    pub written: Vec<String>,
    pub failures: Vec<(String, String)>,
    pub config: serde_json::Value,
}

enum ItemOutcome {
    Written(String),
    Failed(String, String),
    KindMismatch(String, String),
}

/// Runs the configured segmenter over one input file.
pub fn segment_file(path: &Path, segmenter: &SegmenterConfig) -> egoseg_core::Result<BinaryMask> {
    match segmenter {
        SegmenterConfig::Skin(band) => Ok(skin_segment(&load_rgb(path)?, band)),
        SegmenterConfig::Depth(band) => Ok(depth_segment(&load_depth(path)?, band)),
        SegmenterConfig::External(_) => load_mask(path),
    }
}

fn output_path(out_dir: &Path, input: &Path) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out_dir.join(format!("{stem}.png"))
}

fn process(path: &Path, out_dir: &Path, segmenter: &SegmenterConfig) -> CliResult<ItemOutcome> {
    let name = file_name(path);
    match segment_file(path, segmenter) {
        Ok(mask) => {
            let out = output_path(out_dir, path);
            save_mask(&out, &mask)?;
            Ok(ItemOutcome::Written(file_name(&out)))
        }
        // wrong raster type for this segmenter kind
        Err(e @ Error::Format { .. }) => Ok(ItemOutcome::KindMismatch(name, e.to_string())),
        Err(e) => Ok(ItemOutcome::Failed(name, e.to_string())),
    }
}

/// Writes one exchange-format prediction mask per input image.
pub fn run(input_dir: &Path, out_dir: &Path, cfg: &RunConfig) -> CliResult<SegmentReport> {
    if !input_dir.is_dir() {
        return Err(CliError::Io(format!(
            "{}: input directory not found",
            input_dir.display()
        )));
    }
    let inputs = image_files(input_dir)?;
    create_dir(&out_dir.to_path_buf())?;
    let outcomes = cfg.install(|| {
        inputs
            .par_iter()
            .map(|p| process(p, out_dir, &cfg.segmenter))
            .collect::<CliResult<Vec<_>>>()
    })??;

    let mut written = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            ItemOutcome::Written(n) => written.push(n),
            ItemOutcome::Failed(n, e) => {
                warn!("segment {n}: {e}");
                failures.push((n, e));
            }
            ItemOutcome::KindMismatch(n, e) => {
                return Err(CliError::Usage(format!(
                    "{n} is not a valid input for the `{}` segmenter: {e}",
                    cfg.segmenter.kind()
                )));
            }
        }
    }
    let report = SegmentReport {
        kind: cfg.segmenter.kind().to_string(),
        inputs: inputs.len(),
        written,
        failures,
        config: cfg.echo(),
    };
    write_json(&out_dir.join("segment_report.json"), &report)?;
    Ok(report)
}
