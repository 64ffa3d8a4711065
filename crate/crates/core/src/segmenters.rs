//! Non-neural baselines (skin-color HSV band, depth band) and the loader
//! through which any external model's masks enter the evaluation harness.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::rgb_to_hsv;
use crate::error::{Error, Result};
use crate::io::load_mask;
use crate::morph::close_predicate;
use crate::raster::{BinaryMask, DepthImage, RgbImage};
use crate::resize::resize_mask;

/// Closing radius used when `DepthBand::fill_holes` is set.
pub const DEPTH_FILL_RADIUS: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkinBand {
    /// Closed hue intervals on `[0, 1]`; a wrap-around band is written as two
    /// intervals split at 0.
    pub hue_ranges: Vec<[f64; 2]>,
    pub s_min: f64,
    pub s_max: f64,
    pub v_min: f64,
}

impl Default for SkinBand {
    fn default() -> Self {
        Self {
            hue_ranges: vec![[0.0, 0.14]],
            s_min: 0.15,
            s_max: 0.90,
            v_min: 0.20,
        }
    }
}

impl SkinBand {
    pub fn validate(&self) -> Result<()> {
        for &[lo, hi] in &self.hue_ranges {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::param(
                    "hue_ranges",
                    format!("interval [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"),
                ));
            }
        }
        if !(0.0 <= self.s_min && self.s_min <= self.s_max && self.s_max <= 1.0) {
            return Err(Error::param(
                "s_min/s_max",
                format!(
                    "need 0 <= s_min <= s_max <= 1, got {} and {}",
                    self.s_min, self.s_max
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.v_min) {
            return Err(Error::param(
                "v_min",
                format!("{} is outside [0, 1]", self.v_min),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, h: f64, s: f64, v: f64) -> bool {
        s >= self.s_min
            && s <= self.s_max
            && v >= self.v_min
            && self.hue_ranges.iter().any(|&[lo, hi]| lo <= h && h <= hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DepthBand {
    pub d_min: u16,
    pub d_max: u16,
    pub fill_holes: bool,
}

impl Default for DepthBand {
    fn default() -> Self {
        Self {
            d_min: 100,
            d_max: 400,
            fill_holes: true,
        }
    }
}

impl DepthBand {
    pub fn validate(&self) -> Result<()> {
        if !(0 < self.d_min && self.d_min < self.d_max) {
            return Err(Error::param(
                "d_min/d_max",
                format!(
                    "need 0 < d_min < d_max, got {} and {}",
                    self.d_min, self.d_max
                ),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, depth: u16) -> bool {
        depth != 0 && self.d_min <= depth && depth <= self.d_max
    }
}

/// Segmenter selection as it appears under `[segmenter]` in a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SegmenterConfig {
    Skin(SkinBand),
    Depth(DepthBand),
    External(ExternalConfig),
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig::Skin(SkinBand::default())
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            SegmenterConfig::Skin(b) => b.validate(),
            SegmenterConfig::Depth(b) => b.validate(),
            SegmenterConfig::External(_) => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SegmenterConfig::Skin(_) => "skin",
            SegmenterConfig::Depth(_) => "depth",
            SegmenterConfig::External(_) => "external",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExternalConfig {
    pub resize_pred: bool,
}

pub fn skin_segment(image: &RgbImage, band: &SkinBand) -> BinaryMask {
    let labels = image
        .pixels()
        .map(|p| {
            let hsv = rgb_to_hsv(p);
            band.contains(hsv.h, hsv.s, hsv.v)
        })
        .collect();
    BinaryMask::from_parts_unchecked(image.width(), image.height(), labels)
}

pub fn depth_segment(depth: &DepthImage, band: &DepthBand) -> BinaryMask {
    let (w, h) = depth.dimensions();
    let d = depth.depths();
    let labels = if band.fill_holes {
        close_predicate(w, h, DEPTH_FILL_RADIUS, |i| band.contains(d[i]))
    } else {
        d.iter().map(|&v| band.contains(v)).collect()
    };
    BinaryMask::from_parts_unchecked(w, h, labels)
}

/// Loads a third-party prediction in the exchange format. With `resize`, a
/// prediction of the wrong size is nearest-neighbor resized instead of
/// rejected.
pub fn load_prediction_mask(
    path: &Path,
    expected_width: u32,
    expected_height: u32,
    resize: bool,
) -> Result<BinaryMask> {
    let mask = load_mask(path)?;
    if mask.dimensions() == (expected_width, expected_height) {
        return Ok(mask);
    }
    if resize {
        return resize_mask(&mask, expected_width, expected_height);
    }
    Err(Error::DimensionMismatch(format!(
        "{}: prediction is {}x{} but groundtruth is {}x{} (pass --resize-pred to resample)",
        path.display(),
        mask.width(),
        mask.height(),
        expected_width,
        expected_height
    )))
}
