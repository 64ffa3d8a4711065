pub mod bench;
pub mod composite;
pub mod evaluate;
pub mod extract;
pub mod heatmap;
pub mod segment;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    egoseg_core::compositor::write_json(path, value).map_err(CliError::from)
}

pub(crate) fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Image files (png/jpg/jpeg) of `dir` in lexicographic order.
pub(crate) fn image_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let files = egoseg_core::compositor::sorted_files(dir)?;
    Ok(files
        .into_iter()
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
                .unwrap_or(false)
        })
        .collect())
}
