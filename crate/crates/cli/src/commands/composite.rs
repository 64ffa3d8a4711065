use std::path::Path;

use egoseg_core::{build_dataset, prepare_backgrounds, BuildReport};
use log::info;

use crate::config::RunConfig;
use crate::error::{create_dir, CliError, CliResult};

/// Background pool preparation followed by dataset assembly.
pub fn run(
    fg_dir: &Path,
    mask_dir: &Path,
    bg_dir: &Path,
    out_dir: &Path,
    cfg: &RunConfig,
) -> CliResult<BuildReport> {
    let metadata = cfg.metadata.as_ref().ok_or_else(|| {
        CliError::Config("missing `[metadata]` section (capture attributes)".into())
    })?;
    for d in [fg_dir, mask_dir, bg_dir] {
        if !d.is_dir() {
            return Err(CliError::Io(format!(
                "{}: directory not found",
                d.display()
            )));
        }
    }
    let pool = prepare_backgrounds(bg_dir, cfg.composite.background_size)?;
    info!("composite: background pool holds {} images", pool.len());
    create_dir(&out_dir.to_path_buf())?;
    let report = cfg.install(|| {
        build_dataset(
            fg_dir,
            mask_dir,
            &pool,
            metadata,
            &cfg.composite.composite_config(),
            &cfg.qc,
            out_dir,
            cfg.echo(),
        )
    })??;
    info!(
        "composite: {} manifest entries, {} rejected, {} missing",
        report.manifest_entries, report.rejected, report.missing
    );
    Ok(report)
}
