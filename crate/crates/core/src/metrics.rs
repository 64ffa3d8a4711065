//! Arm-class IoU, miss rate, dataset aggregation, and spatial occurrence
//! heatmaps.
//!
//! Percentages are on `[0, 100]`. A ratio whose denominator is zero is
//! *undefined* (`None`), never 0 or 100, and is excluded from macro
//! averages with an explicit count.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::save_luma16;
use crate::raster::BinaryMask;
use crate::resize::resize_mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

pub fn confusion(gt: &BinaryMask, pred: &BinaryMask) -> Result<ConfusionCounts> {
    if gt.dimensions() != pred.dimensions() {
        return Err(Error::DimensionMismatch(format!(
            "groundtruth is {}x{} but prediction is {}x{}",
            gt.width(),
            gt.height(),
            pred.width(),
            pred.height()
        )));
    }
    // index = 2*gt + pred
    let mut bins = [0u64; 4];
    for (&g, &p) in gt.labels().iter().zip(pred.labels()) {
        bins[((g as usize) << 1) | p as usize] += 1;
    }
    Ok(ConfusionCounts {
        tn: bins[0],
        fp: bins[1],
        fn_: bins[2],
        tp: bins[3],
    })
}

pub fn iou_arm(c: &ConfusionCounts) -> Option<f64> {
    let denom = c.tp + c.fp + c.fn_;
    (denom > 0).then(|| 100.0 * c.tp as f64 / denom as f64)
}

pub fn miss_rate(c: &ConfusionCounts) -> Option<f64> {
    let denom = c.fn_ + c.tp;
    (denom > 0).then(|| 100.0 * c.fn_ as f64 / denom as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub sample_id: String,
    #[serde(default)]
    pub dataset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
    pub iou_arm: Option<f64>,
    pub miss_rate: Option<f64>,
    pub counts: ConfusionCounts,
}

impl MetricRecord {
    pub fn new(sample_id: impl Into<String>, counts: ConfusionCounts) -> Self {
        Self {
            sample_id: sample_id.into(),
            dataset: String::new(),
            scene: None,
            iou_arm: iou_arm(&counts),
            miss_rate: miss_rate(&counts),
            counts,
        }
    }

    pub fn evaluate(
        sample_id: impl Into<String>,
        gt: &BinaryMask,
        pred: &BinaryMask,
    ) -> Result<Self> {
        Ok(Self::new(sample_id, confusion(gt, pred)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub dataset_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
    pub n_samples: usize,
    /// Records whose IoU is undefined (no arm pixels in either mask).
    pub n_undefined: usize,
    /// Records whose miss rate is undefined (no arm pixels in groundtruth).
    pub n_miss_undefined: usize,
    pub iou_mean: Option<f64>,
    pub iou_std: Option<f64>,
    pub miss_mean: Option<f64>,
    pub miss_std: Option<f64>,
    pub iou_micro: Option<f64>,
    pub miss_micro: Option<f64>,
    pub counts: ConfusionCounts,
}

/// Population mean and standard deviation.
fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

/// Macro and micro statistics over `records`, folded in `sample_id` order so
/// the floating-point result does not depend on input order.
pub fn aggregate(records: &[MetricRecord], dataset_name: &str) -> Result<MetricSummary> {
    if records.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no records to aggregate for dataset {dataset_name:?}"
        )));
    }
    let mut sorted: Vec<&MetricRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    let ious: Vec<f64> = sorted.iter().filter_map(|r| r.iou_arm).collect();
    let misses: Vec<f64> = sorted.iter().filter_map(|r| r.miss_rate).collect();
    let pooled = sorted
        .iter()
        .fold(ConfusionCounts::default(), |acc, r| acc + r.counts);
    let (iou_mean, iou_std) = mean_std(&ious);
    let (miss_mean, miss_std) = mean_std(&misses);
    Ok(MetricSummary {
        dataset_name: dataset_name.to_string(),
        scene: None,
        n_samples: records.len(),
        n_undefined: records.len() - ious.len(),
        n_miss_undefined: records.len() - misses.len(),
        iou_mean,
        iou_std,
        miss_mean,
        miss_std,
        iou_micro: iou_arm(&pooled),
        miss_micro: miss_rate(&pooled),
        counts: pooled,
    })
}

/// Per-pixel foreground frequency over a set of masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heatmap {
    width: u32,
    height: u32,
    hits: Vec<u32>,
    n_masks: u32,
}

impl Heatmap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn n_masks(&self) -> u32 {
        self.n_masks
    }

    pub fn hits(&self) -> &[u32] {
        &self.hits
    }

    pub fn occupancy(&self) -> Vec<f64> {
        let n = self.n_masks as f64;
        self.hits.iter().map(|&h| h as f64 / n).collect()
    }

    /// `round(occupancy * 65535)` with halves rounded up, in exact integer
    /// arithmetic.
    pub fn to_u16(&self) -> Vec<u16> {
        let n = self.n_masks as u64;
        self.hits
            .iter()
            .map(|&h| ((2 * h as u64 * 65535 + n) / (2 * n)) as u16)
            .collect()
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        save_luma16(path, self.width, self.height, self.to_u16())
    }
}

pub fn heatmap<'a>(
    masks: impl IntoIterator<Item = &'a BinaryMask>,
    reference_size: (u32, u32),
) -> Result<Heatmap> {
    let (w, h) = reference_size;
    let mut acc = HeatmapAccumulator::new(w, h)?;
    for m in masks {
        acc.add(m)?;
    }
    acc.finish()
}

/// Streaming form of [`heatmap`] for mask sets that do not fit in memory.
#[derive(Debug, Clone)]
pub struct HeatmapAccumulator {
    width: u32,
    height: u32,
    hits: Vec<u32>,
    n_masks: u32,
}

impl HeatmapAccumulator {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            hits: vec![0; width as usize * height as usize],
            n_masks: 0,
        })
    }

    pub fn add(&mut self, mask: &BinaryMask) -> Result<()> {
        let resized;
        let m = if mask.dimensions() == (self.width, self.height) {
            mask
        } else {
            resized = resize_mask(mask, self.width, self.height)?;
            &resized
        };
        for (h, &l) in self.hits.iter_mut().zip(m.labels()) {
            *h += l as u32;
        }
        self.n_masks += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<Heatmap> {
        if self.n_masks == 0 {
            return Err(Error::EmptyInput("heatmap needs at least one mask".into()));
        }
        Ok(Heatmap {
            width: self.width,
            height: self.height,
            hits: self.hits,
            n_masks: self.n_masks,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

fn cell2(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

fn csv_num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders summaries as a table. Markdown cells follow the
/// `IoU (MissRate)` convention at two decimals; CSV and JSON keep full
/// precision.
pub fn report(summaries: &[MetricSummary], format: ReportFormat) -> Result<String> {
    if summaries.is_empty() {
        return Err(Error::EmptyInput(
            "report needs at least one summary".into(),
        ));
    }
    if let Some(s) = summaries.iter().find(|s| s.dataset_name.is_empty()) {
        return Err(Error::param(
            "dataset",
            format!("empty dataset name in summary with {} samples", s.n_samples),
        ));
    }
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(summaries)?;
            out.push('\n');
        }
        ReportFormat::Markdown => {
            out.push_str("| Dataset | Scene | N | Undefined | IoU (MissRate) | IoU mean ± std | Micro IoU (MissRate) |\n");
            out.push_str("|---|---|---:|---:|---:|---:|---:|\n");
            for s in summaries {
                let std = match (s.iou_mean, s.iou_std) {
                    (Some(m), Some(sd)) => format!("{m:.2} ± {sd:.2}"),
                    _ => "n/a".into(),
                };
                writeln!(
                    out,
                    "| {} | {} | {} | {} | {} ({}) | {} | {} ({}) |",
                    s.dataset_name,
                    s.scene.as_deref().unwrap_or("all"),
                    s.n_samples,
                    s.n_undefined,
                    cell2(s.iou_mean),
                    cell2(s.miss_mean),
                    std,
                    cell2(s.iou_micro),
                    cell2(s.miss_micro),
                )
                .expect("writing to a String cannot fail");
            }
        }
        ReportFormat::Csv => {
            out.push_str("dataset,scene,n_samples,n_undefined,n_miss_undefined,iou_mean,iou_std,miss_mean,miss_std,iou_micro,miss_micro,tp,fp,fn,tn\n");
            for s in summaries {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    csv_field(&s.dataset_name),
                    csv_field(s.scene.as_deref().unwrap_or("")),
                    s.n_samples,
                    s.n_undefined,
                    s.n_miss_undefined,
                    csv_num(s.iou_mean),
                    csv_num(s.iou_std),
                    csv_num(s.miss_mean),
                    csv_num(s.miss_std),
                    csv_num(s.iou_micro),
                    csv_num(s.miss_micro),
                    s.counts.tp,
                    s.counts.fp,
                    s.counts.fn_,
                    s.counts.tn,
                )
                .expect("writing to a String cannot fail");
            }
        }
    }
    Ok(out)
}
