//! Single-threaded per-image latency of the baseline segmenters.
//!
//! Depth timing covers only the band threshold (plus hole filling when
//! enabled), not the production of the depth map itself.

use std::hint::black_box;
use std::time::Instant;

use clap::ValueEnum;
use egoseg_core::{
    depth_segment, skin_segment, DepthBand, DepthImage, RgbImage, SegmenterConfig, SkinBand,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const WARMUP_ITERATIONS: usize = 3;
pub const MIN_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BenchKind {
    /// HSV skin-color band (alias: color)
    #[value(alias = "color")]
    Skin,
    Depth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub kind: BenchKind,
    pub width: u32,
    pub height: u32,
    pub n_iterations: usize,
    pub warmup_iterations: usize,
    pub threads: usize,
    pub mean_us: f64,
    pub median_us: f64,
    pub p95_us: f64,
    pub min_us: f64,
    pub max_us: f64,
    pub note: String,
    pub config: serde_json::Value,
}

/// Deterministic color frame: a textured backdrop with a skin-toned blob
/// entering from the bottom edge.
pub fn synthetic_rgb(width: u32, height: u32) -> RgbImage {
    let (cx, cy) = (width as f64 / 2.0, height as f64);
    let (rx, ry) = (width as f64 / 4.0, height as f64 / 2.0);
    RgbImage::from_fn(width, height, |x, y| {
        let dx = (x as f64 - cx) / rx.max(1.0);
        let dy = (y as f64 - cy) / ry.max(1.0);
        if dx * dx + dy * dy <= 1.0 {
            let t = ((x ^ y) & 31) as u8;
            [200 + t / 2, 150 + t, 100 + t]
        } else {
            [
                (x.wrapping_mul(7) % 256) as u8,
                (y.wrapping_mul(5) % 256) as u8,
                ((x + y).wrapping_mul(3) % 256) as u8,
            ]
        }
    })
    .expect("bench sizes are validated before synthesis")
}

/// Deterministic range image in 50..950 mm with sparse missing pixels.
pub fn synthetic_depth(width: u32, height: u32) -> DepthImage {
    DepthImage::from_fn(width, height, |x, y| {
        if (x + 3 * y) % 37 == 0 {
            0
        } else {
            (50 + (x as u64 * 13 + y as u64 * 7) % 900) as u16
        }
    })
    .expect("bench sizes are validated before synthesis")
}

fn time_iterations(iterations: usize, mut f: impl FnMut()) -> Vec<f64> {
    for _ in 0..WARMUP_ITERATIONS {
        f();
    }
    (0..iterations)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64() * 1e6
        })
        .collect()
}

pub fn run(
    kind: BenchKind,
    width: u32,
    height: u32,
    iterations: usize,
    cfg: &RunConfig,
) -> CliResult<BenchResult> {
    if iterations < MIN_ITERATIONS {
        return Err(CliError::Config(format!(
            "invalid `iterations`: need at least {MIN_ITERATIONS}, got {iterations}"
        )));
    }
    if width == 0 || height == 0 {
        return Err(CliError::Config(format!(
            "invalid `size`: {width}x{height} is empty"
        )));
    }
    let (samples, note) = match kind {
        BenchKind::Skin => {
            let band = match &cfg.segmenter {
                SegmenterConfig::Skin(b) => b.clone(),
                _ => SkinBand::default(),
            };
            let img = synthetic_rgb(width, height);
            let s = time_iterations(iterations, || {
                black_box(skin_segment(black_box(&img), &band));
            });
            (s, "HSV conversion and band test per pixel".to_string())
        }
        BenchKind::Depth => {
            let band: DepthBand = cfg.depth_band_or_default();
            let depth = synthetic_depth(width, height);
            let s = time_iterations(iterations, || {
                black_box(depth_segment(black_box(&depth), &band));
            });
            let note = format!(
                "depth band threshold{}; excludes depth-map generation",
                if band.fill_holes {
                    " plus hole filling"
                } else {
                    ""
                }
            );
            (s, note)
        }
    };
    Ok(summarize(kind, width, height, samples, note, cfg))
}

fn summarize(
    kind: BenchKind,
    width: u32,
    height: u32,
    mut samples: Vec<f64>,
    note: String,
    cfg: &RunConfig,
) -> BenchResult {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    samples.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    };
    // nearest-rank percentile
    let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
    BenchResult {
        kind,
        width,
        height,
        n_iterations: n,
        warmup_iterations: WARMUP_ITERATIONS,
        threads: 1,
        mean_us: mean,
        median_us: median,
        p95_us: samples[rank - 1],
        min_us: samples[0],
        max_us: samples[n - 1],
        note,
        config: cfg.echo(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistics() {
        let samples: Vec<f64> = (1..=20).map(f64::from).collect();
        let r = summarize(
            BenchKind::Skin,
            1,
            1,
            samples,
            String::new(),
            &RunConfig::default(),
        );
        assert_eq!(r.mean_us, 10.5);
        assert_eq!(r.median_us, 10.5);
        assert_eq!(r.p95_us, 19.0);
        assert_eq!((r.min_us, r.max_us), (1.0, 20.0));
    }

    #[test]
    fn too_few_iterations_rejected() {
        let err = run(BenchKind::Depth, 8, 8, 9, &RunConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn degenerate_size_runs() {
        for kind in [BenchKind::Skin, BenchKind::Depth] {
            let r = run(kind, 1, 1, 10, &RunConfig::default()).unwrap();
            assert_eq!(r.n_iterations, 10);
            assert!(r.mean_us > 0.0);
        }
    }

    #[test]
    fn synthetic_frame_contains_skin() {
        let img = synthetic_rgb(64, 64);
        let m = skin_segment(&img, &SkinBand::default());
        assert!(m.foreground_count() > 64 * 64 / 10);
    }
}
