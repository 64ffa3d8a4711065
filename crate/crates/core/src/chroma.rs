//! Groundtruth extraction from chroma-key frames.
//!
//! A pixel belongs to the green backdrop when its hue lies in `[h1, h2]` and
//! its saturation is at least `s1`; the arm is everything else. The printed
//! conjunction `H <= h1 AND H >= h2` can never hold, so the band reading is
//! the default and the literal "outside" reading is kept as
//! [`BandMode::OutsideBand`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::color::rgb_to_hsv;
use crate::components::connected_components;
use crate::error::{Error, Result};
use crate::morph::{morph_clean, MorphConfig};
use crate::raster::{BinaryMask, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandMode {
    /// Foreground = NOT (h1 <= H <= h2 AND S >= s1).
    #[default]
    InsideBand,
    /// Foreground = (H <= h1 OR H >= h2) AND S >= s1.
    OutsideBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChromaThresholds {
    pub h1: f64,
    pub h2: f64,
    pub s1: f64,
    pub band_mode: BandMode,
}

impl Default for ChromaThresholds {
    fn default() -> Self {
        Self {
            h1: 0.22,
            h2: 0.45,
            s1: 0.20,
            band_mode: BandMode::InsideBand,
        }
    }
}

impl ChromaThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.h1 && self.h1 < self.h2 && self.h2 <= 1.0) {
            return Err(Error::param(
                "h1/h2",
                format!("need 0 <= h1 < h2 <= 1, got h1={} h2={}", self.h1, self.h2),
            ));
        }
        if !(0.0..=1.0).contains(&self.s1) {
            return Err(Error::param("s1", format!("{} is outside [0, 1]", self.s1)));
        }
        Ok(())
    }

    /// Foreground decision for one already-converted pixel.
    #[inline]
    pub fn is_foreground(&self, h: f64, s: f64) -> bool {
        match self.band_mode {
            BandMode::InsideBand => !(self.h1 <= h && h <= self.h2 && s >= self.s1),
            BandMode::OutsideBand => (h <= self.h1 || h >= self.h2) && s >= self.s1,
        }
    }
}

/// Indices `0, stride, 2*stride, ...` below `frame_count`.
pub fn select_frames(frame_count: usize, stride: usize) -> Result<Vec<usize>> {
    if stride == 0 {
        return Err(Error::param("stride", "must be at least 1"));
    }
    Ok((0..frame_count).step_by(stride).collect())
}

pub fn chroma_mask(image: &RgbImage, thresholds: &ChromaThresholds) -> BinaryMask {
    let labels = image
        .pixels()
        .map(|p| {
            let hsv = rgb_to_hsv(p);
            thresholds.is_foreground(hsv.h, hsv.s)
        })
        .collect();
    BinaryMask::from_parts_unchecked(image.width(), image.height(), labels)
}

/// Chroma mask followed by morphological cleanup.
pub fn extract_groundtruth(
    image: &RgbImage,
    thresholds: &ChromaThresholds,
    morph: &MorphConfig,
) -> BinaryMask {
    morph_clean(&chroma_mask(image, thresholds), morph)
}

/// Keeps source pixels under the foreground, blacks out the rest.
pub fn mask_foreground(image: &RgbImage, mask: &BinaryMask) -> Result<RgbImage> {
    if image.dimensions() != mask.dimensions() {
        return Err(Error::DimensionMismatch(format!(
            "image is {}x{} but mask is {}x{}",
            image.width(),
            image.height(),
            mask.width(),
            mask.height()
        )));
    }
    let mut data = image.as_raw().to_vec();
    for (px, &fg) in data.chunks_exact_mut(3).zip(mask.labels()) {
        if !fg {
            px.fill(0);
        }
    }
    RgbImage::from_raw(image.width(), image.height(), data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QcConfig {
    pub min_fg_fraction: f64,
    pub max_fg_fraction: f64,
    pub max_components: usize,
    pub forbid_top_border: bool,
}

impl Default for QcConfig {
    fn default() -> Self {
        Self {
            min_fg_fraction: 0.01,
            max_fg_fraction: 0.60,
            max_components: 3,
            forbid_top_border: true,
        }
    }
}

impl QcConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 <= self.min_fg_fraction
            && self.min_fg_fraction <= self.max_fg_fraction
            && self.max_fg_fraction <= 1.0;
        if !ok {
            return Err(Error::param(
                "min_fg_fraction/max_fg_fraction",
                format!(
                    "need 0 <= min <= max <= 1, got {} and {}",
                    self.min_fg_fraction, self.max_fg_fraction
                ),
            ));
        }
        if self.max_components == 0 {
            return Err(Error::param("max_components", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QcRule {
    FgFractionLow,
    FgFractionHigh,
    TooManyComponents,
    TouchesTopBorder,
}

impl QcRule {
    pub fn as_str(self) -> &'static str {
        match self {
            QcRule::FgFractionLow => "fg-fraction-low",
            QcRule::FgFractionHigh => "fg-fraction-high",
            QcRule::TooManyComponents => "too-many-components",
            QcRule::TouchesTopBorder => "touches-top-border",
        }
    }
}

impl fmt::Display for QcRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcVerdict {
    pub accepted: bool,
    pub reasons: Vec<QcRule>,
}

impl QcVerdict {
    fn from_reasons(reasons: Vec<QcRule>) -> Self {
        Self {
            accepted: reasons.is_empty(),
            reasons,
        }
    }
}

/// Flags masks that look like groundtruth with false positives.
pub fn qc_screen(mask: &BinaryMask, config: &QcConfig) -> QcVerdict {
    let mut reasons = Vec::new();
    let fraction = mask.foreground_fraction();
    if fraction < config.min_fg_fraction {
        reasons.push(QcRule::FgFractionLow);
    }
    if fraction > config.max_fg_fraction {
        reasons.push(QcRule::FgFractionHigh);
    }
    if connected_components(mask).len() > config.max_components {
        reasons.push(QcRule::TooManyComponents);
    }
    if config.forbid_top_border && (0..mask.width()).any(|x| mask.get(x, 0)) {
        reasons.push(QcRule::TouchesTopBorder);
    }
    QcVerdict::from_reasons(reasons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::hsv_to_rgb;
    use crate::color::HsvPixel;
    use proptest::prelude::*;

    const GREEN: [u8; 3] = [0, 255, 0];
    const RED: [u8; 3] = [255, 0, 0];

    fn red_square_on_green(side: u32, x0: u32, y0: u32, size: u32) -> RgbImage {
        RgbImage::from_fn(side, side, |x, y| {
            if (x0..x0 + size).contains(&x) && (y0..y0 + size).contains(&y) {
                RED
            } else {
                GREEN
            }
        })
        .unwrap()
    }

    #[test]
    fn stride_selection() {
        assert_eq!(select_frames(30, 5).unwrap(), vec![0, 5, 10, 15, 20, 25]);
        assert_eq!(select_frames(3, 1).unwrap(), vec![0, 1, 2]);
        assert!(select_frames(0, 5).unwrap().is_empty());
        assert!(matches!(
            select_frames(10, 0),
            Err(Error::InvalidParameter {
                field: "stride",
                ..
            })
        ));
    }

    #[test]
    fn uniform_green_is_all_background() {
        let img = RgbImage::filled(16, 16, GREEN).unwrap();
        assert!(chroma_mask(&img, &ChromaThresholds::default()).is_empty());
    }

    #[test]
    fn red_square_is_exactly_foreground() {
        let img = red_square_on_green(48, 10, 14, 20);
        let t = ChromaThresholds::default();
        // per-pixel predicate evaluated independently of chroma_mask
        let oracle = BinaryMask::from_fn(48, 48, |x, y| {
            let p = rgb_to_hsv(img.get(x, y));
            !((0.22..=0.45).contains(&p.h) && p.s >= 0.20)
        })
        .unwrap();
        let mask = chroma_mask(&img, &t);
        assert_eq!(mask, oracle);
        assert_eq!(mask.foreground_count(), 400);
        assert!(mask.get(10, 14) && mask.get(29, 33) && !mask.get(30, 33));
    }

    #[test]
    fn desaturated_green_is_foreground() {
        let px = hsv_to_rgb(HsvPixel {
            h: 0.30,
            s: 0.10,
            v: 0.8,
        });
        let hsv = rgb_to_hsv(px);
        assert!((hsv.h - 0.30).abs() < 0.02 && hsv.s < 0.2);
        let img = RgbImage::filled(1, 1, px).unwrap();
        assert!(chroma_mask(&img, &ChromaThresholds::default()).get(0, 0));
    }

    #[test]
    fn groundtruth_drops_noise_pixels() {
        let mut img = red_square_on_green(64, 30, 40, 20);
        for (x, y) in [(3, 3), (60, 5), (5, 58)] {
            img.set(x, y, RED);
        }
        let morph = MorphConfig {
            open_radius: 0,
            close_radius: 2,
            min_component_area: 64,
        };
        let expected = chroma_mask(
            &red_square_on_green(64, 30, 40, 20),
            &ChromaThresholds::default(),
        );
        let gt = extract_groundtruth(&img, &ChromaThresholds::default(), &morph);
        assert_eq!(gt, expected);
        assert_eq!(gt.foreground_count(), 400);
    }

    #[test]
    fn all_green_frame_gives_empty_groundtruth() {
        let img = RgbImage::filled(32, 32, GREEN).unwrap();
        let gt = extract_groundtruth(&img, &ChromaThresholds::default(), &MorphConfig::default());
        assert!(gt.is_empty());
    }

    #[test]
    fn disabled_morphology_is_identity() {
        let img = red_square_on_green(40, 5, 5, 3);
        let t = ChromaThresholds::default();
        assert_eq!(
            extract_groundtruth(&img, &t, &MorphConfig::DISABLED),
            chroma_mask(&img, &t)
        );
    }

    #[test]
    fn masking_foreground() {
        let img = RgbImage::from_fn(2, 2, |x, y| [10 + x as u8, 20 + y as u8, 30]).unwrap();
        let all = BinaryMask::new(2, 2, true).unwrap();
        assert_eq!(mask_foreground(&img, &all).unwrap(), img);
        let none = BinaryMask::new(2, 2, false).unwrap();
        assert!(mask_foreground(&img, &none)
            .unwrap()
            .as_raw()
            .iter()
            .all(|&b| b == 0));
        let mut one = none.clone();
        one.set(1, 0, true);
        let out = mask_foreground(&img, &one).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                let want = if (x, y) == (1, 0) {
                    img.get(x, y)
                } else {
                    [0, 0, 0]
                };
                assert_eq!(out.get(x, y), want);
            }
        }
    }

    #[test]
    fn masking_reports_both_sizes() {
        let img = RgbImage::filled(3, 2, RED).unwrap();
        let mask = BinaryMask::new(2, 3, true).unwrap();
        let msg = mask_foreground(&img, &mask).unwrap_err().to_string();
        assert!(msg.contains("3x2") && msg.contains("2x3"), "{msg}");
    }

    #[test]
    fn qc_rules() {
        let cfg = QcConfig {
            min_fg_fraction: 0.02,
            ..QcConfig::default()
        };
        let empty = BinaryMask::new(20, 20, false).unwrap();
        let v = qc_screen(&empty, &cfg);
        assert!(!v.accepted);
        assert_eq!(v.reasons, vec![QcRule::FgFractionLow]);

        // 10% of a 20x20 mask, anchored to the bottom edge
        let blob = BinaryMask::from_fn(20, 20, |x, y| y >= 18 && x < 20).unwrap();
        assert_eq!(blob.foreground_fraction(), 0.1);
        let v = qc_screen(&blob, &QcConfig::default());
        assert!(v.accepted && v.reasons.is_empty());

        let five = BinaryMask::from_fn(30, 30, |x, y| (20..26).contains(&y) && x % 6 < 3).unwrap();
        assert_eq!(connected_components(&five).len(), 5);
        let v = qc_screen(
            &five,
            &QcConfig {
                max_components: 3,
                ..QcConfig::default()
            },
        );
        assert_eq!(v.reasons, vec![QcRule::TooManyComponents]);

        let top = BinaryMask::from_fn(20, 20, |x, y| x < 4 && y < 10).unwrap();
        let v = qc_screen(&top, &QcConfig::default());
        assert_eq!(v.reasons, vec![QcRule::TouchesTopBorder]);
        assert_eq!(v.reasons[0].to_string(), "touches-top-border");
    }

    #[test]
    fn threshold_validation() {
        assert!(ChromaThresholds::default().validate().is_ok());
        let bad = ChromaThresholds {
            h1: 0.5,
            h2: 0.4,
            ..ChromaThresholds::default()
        };
        assert!(bad.validate().is_err());
        assert!(QcConfig {
            max_components: 0,
            ..QcConfig::default()
        }
        .validate()
        .is_err());
    }

    fn arb_image() -> impl Strategy<Value = RgbImage> {
        (1u32..12, 1u32..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), (w * h * 3) as usize)
                .prop_map(move |d| RgbImage::from_raw(w, h, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn inside_band_partitions_pixels(img in arb_image()) {
            let t = ChromaThresholds::default();
            let mask = chroma_mask(&img, &t);
            for (p, &fg) in img.pixels().zip(mask.labels()) {
                let hsv = rgb_to_hsv(p);
                let band = t.h1 <= hsv.h && hsv.h <= t.h2 && hsv.s >= t.s1;
                prop_assert!(fg ^ band);
            }
        }

        #[test]
        fn cleanup_without_closing_only_shrinks(img in arb_image()) {
            let t = ChromaThresholds::default();
            let morph = MorphConfig { close_radius: 0, ..MorphConfig::default() };
            let gt = extract_groundtruth(&img, &t, &morph);
            prop_assert!(gt.foreground_count() <= chroma_mask(&img, &t).foreground_count());
        }

        #[test]
        fn masking_is_idempotent(img in arb_image(), seed in any::<u64>()) {
            let (w, h) = img.dimensions();
            let mask = BinaryMask::from_fn(w, h, |x, y| (seed >> ((x + y * 3) % 64)) & 1 == 1).unwrap();
            let once = mask_foreground(&img, &mask).unwrap();
            prop_assert_eq!(mask_foreground(&once, &mask).unwrap(), once);
        }

        #[test]
        fn unsatisfiable_saturation_gate(
            data in proptest::collection::vec(1u8..=255, 3..=300),
        ) {
            // no zero channel means S = (max - min) / max < 1 everywhere
            let n = data.len() / 3;
            let img = RgbImage::from_raw(n as u32, 1, data[..n * 3].to_vec()).unwrap();
            prop_assert!(img.pixels().all(|p| rgb_to_hsv(p).s < 1.0));
            let t = ChromaThresholds { s1: 1.0, ..ChromaThresholds::default() };
            prop_assert!(chroma_mask(&img, &t).labels().iter().all(|&l| l));
        }

        #[test]
        fn selected_frame_count(n in 0usize..500, stride in 1usize..40) {
            prop_assert_eq!(select_frames(n, stride).unwrap().len(), n.div_ceil(stride));
        }
    }
}
