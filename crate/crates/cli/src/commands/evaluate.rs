//! Scores prediction masks against groundtruth from a pairs file and
//! writes per-record metrics, per-dataset and per-scene summaries, tables
//! and occurrence heatmaps.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use egoseg_core::io::load_mask;
use egoseg_core::metrics::HeatmapAccumulator;
use egoseg_core::{
    aggregate, load_prediction_mask, report, MetricRecord, MetricSummary, ReportFormat,
};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::write_json;
use crate::config::RunConfig;
use crate::error::{create_dir, CliError, CliResult};

/// One line of the pairs file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalPair {
    pub sample_id: String,
    pub gt_path: PathBuf,
    pub pred_path: PathBuf,
    pub dataset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairError {
    pub line: usize,
    pub sample_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub datasets: Vec<MetricSummary>,
    pub scenes: Vec<MetricSummary>,
    pub heatmaps: Vec<String>,
    pub errors: Vec<PairError>,
    pub config: serde_json::Value,
}

pub fn read_pairs(path: &Path) -> CliResult<Vec<(usize, EvalPair)>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut pair: EvalPair = serde_json::from_str(line)
            .map_err(|e| CliError::Config(format!("{} line {}: {e}", path.display(), i + 1)))?;
        for p in [&mut pair.gt_path, &mut pair.pred_path] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        out.push((i + 1, pair));
    }
    Ok(out)
}

fn validate_pairs(pairs: Vec<(usize, EvalPair)>) -> (Vec<(usize, EvalPair)>, Vec<PairError>) {
    let mut seen = HashSet::new();
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (line, pair) in pairs {
        let problem = if pair.dataset.trim().is_empty() {
            Some("empty dataset name".to_string())
        } else if pair.sample_id.trim().is_empty() {
            Some("empty sample_id".to_string())
        } else if !seen.insert((pair.dataset.clone(), pair.sample_id.clone())) {
            Some(format!("duplicate sample_id in dataset {:?}", pair.dataset))
        } else {
            None
        };
        match problem {
            Some(error) => errors.push(PairError {
                line,
                sample_id: pair.sample_id,
                error,
            }),
            None => ok.push((line, pair)),
        }
    }
    (ok, errors)
}

fn evaluate_pair(pair: &EvalPair, resize_pred: bool) -> egoseg_core::Result<MetricRecord> {
    let gt = load_mask(&pair.gt_path)?;
    let pred = load_prediction_mask(&pair.pred_path, gt.width(), gt.height(), resize_pred)?;
    let mut record = MetricRecord::evaluate(pair.sample_id.clone(), &gt, &pred)?;
    record.dataset = pair.dataset.clone();
    record.scene = pair.scene.clone();
    Ok(record)
}

/// Filesystem-safe form of a dataset name.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn run(pairs_file: &Path, out_dir: &Path, cfg: &RunConfig) -> CliResult<EvaluationSummary> {
    let pairs = read_pairs(pairs_file)?;
    let (pairs, mut errors) = validate_pairs(pairs);
    let resize = cfg.evaluate.resize_pred;

    let results: Vec<(usize, &EvalPair, egoseg_core::Result<MetricRecord>)> =
        cfg.install(|| {
            pairs
                .par_iter()
                .map(|(line, p)| (*line, p, evaluate_pair(p, resize)))
                .collect()
        })?;

    let mut records = Vec::new();
    let mut gt_paths: BTreeMap<String, Vec<(String, PathBuf)>> = BTreeMap::new();
    for (line, pair, result) in results {
        match result {
            Ok(r) => {
                gt_paths
                    .entry(pair.dataset.clone())
                    .or_default()
                    .push((pair.sample_id.clone(), pair.gt_path.clone()));
                records.push(r);
            }
            Err(e) => {
                warn!("pair {} (line {line}): {e}", pair.sample_id);
                errors.push(PairError {
                    line,
                    sample_id: pair.sample_id.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    errors.sort_by_key(|e| e.line);
    if records.is_empty() {
        return Err(CliError::Io(format!(
            "{}: no readable pairs ({} errors)",
            pairs_file.display(),
            errors.len()
        )));
    }
    records.sort_by(|a, b| (&a.dataset, &a.sample_id).cmp(&(&b.dataset, &b.sample_id)));

    let mut by_dataset: BTreeMap<&str, Vec<MetricRecord>> = BTreeMap::new();
    let mut by_scene: BTreeMap<(&str, &str), Vec<MetricRecord>> = BTreeMap::new();
    for r in &records {
        by_dataset.entry(&r.dataset).or_default().push(r.clone());
        if let Some(scene) = &r.scene {
            by_scene
                .entry((&r.dataset, scene))
                .or_default()
                .push(r.clone());
        }
    }
    let datasets = by_dataset
        .iter()
        .map(|(name, recs)| aggregate(recs, name))
        .collect::<egoseg_core::Result<Vec<_>>>()?;
    let scenes = by_scene
        .iter()
        .map(|((name, scene), recs)| {
            let mut s = aggregate(recs, name)?;
            s.scene = Some(scene.to_string());
            Ok(s)
        })
        .collect::<egoseg_core::Result<Vec<_>>>()?;

    create_dir(&out_dir.to_path_buf())?;
    egoseg_core::compositor::write_jsonl(&out_dir.join("metrics.jsonl"), &records)?;

    let mut heatmaps = Vec::new();
    for (dataset, mut gts) in gt_paths {
        gts.sort();
        let mut acc: Option<HeatmapAccumulator> = None;
        for (_, path) in &gts {
            let mask = load_mask(path)?;
            let a = match acc.as_mut() {
                Some(a) => a,
                None => {
                    let [w, h] = cfg
                        .evaluate
                        .heatmap_size
                        .unwrap_or([mask.width(), mask.height()]);
                    acc.insert(HeatmapAccumulator::new(w, h)?)
                }
            };
            a.add(&mask)?;
        }
        if let Some(acc) = acc {
            let name = format!("heatmap_{}.png", slug(&dataset));
            acc.finish()?.save_png(&out_dir.join(&name))?;
            heatmaps.push(name);
        }
    }

    let mut table = datasets.clone();
    table.extend(scenes.iter().cloned());
    let md = report(&table, ReportFormat::Markdown)?;
    let csv = report(&table, ReportFormat::Csv)?;
    for (name, body) in [("report.md", md), ("report.csv", csv)] {
        let p = out_dir.join(name);
        std::fs::write(&p, body).map_err(|e| CliError::io(&p, e))?;
    }

    let summary = EvaluationSummary {
        datasets,
        scenes,
        heatmaps,
        errors,
        config: cfg.echo(),
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    info!(
        "evaluate: {} records over {} datasets, {} errors",
        records.len(),
        summary.datasets.len(),
        summary.errors.len()
    );
    Ok(summary)
}
