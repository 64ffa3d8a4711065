use std::path::Path;

use egoseg_core::io::load_mask;
use egoseg_core::metrics::HeatmapAccumulator;
use egoseg_core::Heatmap;
use log::warn;
use serde::Serialize;

use super::{file_name, image_files, write_json};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
struct HeatmapReport<'a> {
    masks: usize,
    width: u32,
    height: u32,
    encoding: &'static str,
    skipped: &'a [(String, String)],
    config: serde_json::Value,
}

/// Occurrence heatmap over every mask in `masks_dir`, written as a 16-bit
/// PNG plus a `<out>.json` sidecar.
pub fn run(
    masks_dir: &Path,
    out_path: &Path,
    size: Option<(u32, u32)>,
    cfg: &RunConfig,
) -> CliResult<Heatmap> {
    if !masks_dir.is_dir() {
        return Err(CliError::Io(format!(
            "{}: directory not found",
            masks_dir.display()
        )));
    }
    let mut acc: Option<HeatmapAccumulator> = None;
    let mut skipped = Vec::new();
    for path in image_files(masks_dir)? {
        let mask = match load_mask(&path) {
            Ok(m) => m,
            Err(e) => {
                warn!("heatmap: skipping {}: {e}", path.display());
                skipped.push((file_name(&path), e.to_string()));
                continue;
            }
        };
        let a = match acc.as_mut() {
            Some(a) => a,
            None => {
                let (w, h) = size.unwrap_or(mask.dimensions());
                acc.insert(HeatmapAccumulator::new(w, h)?)
            }
        };
        a.add(&mask)?;
    }
    let Some(acc) = acc else {
        return Err(CliError::Io(format!(
            "{}: no masks found",
            masks_dir.display()
        )));
    };
    let heatmap = acc.finish()?;
    if let Some(parent) = out_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    heatmap.save_png(out_path)?;
    let mut sidecar = out_path.as_os_str().to_owned();
    sidecar.push(".json");
    write_json(
        Path::new(&sidecar),
        &HeatmapReport {
            masks: heatmap.n_masks() as usize,
            width: heatmap.width(),
            height: heatmap.height(),
            encoding: "u16 = round_half_up(occupancy * 65535)",
            skipped: &skipped,
            config: cfg.echo(),
        },
    )?;
    Ok(heatmap)
}
