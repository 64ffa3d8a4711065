//! Binary morphology with a discrete disk structuring element.
//!
//! Dilation and erosion are restricted to the image domain: pixels outside
//! the raster never contribute to a dilation and never erode a neighbor.
//! The two operators are therefore adjoint, which keeps opening
//! anti-extensive, closing extensive, and both idempotent.

use serde::{Deserialize, Serialize};

use crate::components::connected_components_labeled;
use crate::raster::BinaryMask;

/// Reference frame side used to scale `min_component_area`.
pub const REFERENCE_SIDE: u32 = 720;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorphConfig {
    pub open_radius: u32,
    pub close_radius: u32,
    pub min_component_area: u64,
}

impl Default for MorphConfig {
    fn default() -> Self {
        Self {
            open_radius: 1,
            close_radius: 2,
            min_component_area: 64,
        }
    }
}

impl MorphConfig {
    pub const DISABLED: MorphConfig = MorphConfig {
        open_radius: 0,
        close_radius: 0,
        min_component_area: 0,
    };

    /// Rescales `min_component_area` from the 720x720 reference to `width x height`.
    pub fn scaled_for(self, width: u32, height: u32) -> Self {
        let reference = (REFERENCE_SIDE as f64).powi(2);
        let area = self.min_component_area as f64 * (width as f64 * height as f64) / reference;
        Self {
            min_component_area: area.round() as u64,
            ..self
        }
    }
}

/// Half-widths of the disk's horizontal chords, indexed by `dy + radius`.
fn disk_chords(radius: u32) -> Vec<u32> {
    let r = radius as i64;
    (-r..=r)
        .map(|dy| {
            let rem = r * r - dy * dy;
            let mut w = (rem as f64).sqrt() as i64;
            while w * w > rem {
                w -= 1;
            }
            while (w + 1) * (w + 1) <= rem {
                w += 1;
            }
            w as u32
        })
        .collect()
}

/// Whether `(dx, dy)` lies inside the disk of `radius` (Euclidean test).
pub fn in_disk(dx: i64, dy: i64, radius: u32) -> bool {
    dx * dx + dy * dy <= (radius as i64) * (radius as i64)
}

/// Mask rows packed 64 pixels per word, pixel `x` at bit `x % 64` of word
/// `x / 64`. Bits past the row width are always zero.
#[derive(Clone)]
struct BitRows {
    width: usize,
    height: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitRows {
    fn zeros(width: usize, height: usize) -> Self {
        let stride = width.div_ceil(64);
        Self {
            width,
            height,
            stride,
            words: vec![0; stride * height],
        }
    }

    fn pack(labels: &[bool], width: usize, height: usize, invert: bool) -> Self {
        let mut out = Self::zeros(width, height);
        for (row_in, row_out) in labels
            .chunks_exact(width)
            .zip(out.words.chunks_exact_mut(out.stride))
        {
            for (chunk, word) in row_in.chunks(64).zip(row_out.iter_mut()) {
                let mut w = 0u64;
                for (i, &b) in chunk.iter().enumerate() {
                    w |= ((b ^ invert) as u64) << i;
                }
                *word = w;
            }
        }
        out
    }

    /// Packs `pred(i)` for every row-major pixel index `i`.
    fn from_predicate(width: usize, height: usize, pred: impl Fn(usize) -> bool) -> Self {
        let mut out = Self::zeros(width, height);
        let stride = out.stride;
        for (y, row) in out.words.chunks_exact_mut(stride).enumerate() {
            let base = y * width;
            for (k, word) in row.iter_mut().enumerate() {
                let x0 = k * 64;
                let n = (width - x0).min(64);
                let mut w = 0u64;
                for b in 0..n {
                    w |= (pred(base + x0 + b) as u64) << b;
                }
                *word = w;
            }
        }
        out
    }

    fn unpack(&self, invert: bool) -> Vec<bool> {
        let mut out = vec![invert; self.width * self.height];
        for (row, dst) in self
            .words
            .chunks_exact(self.stride)
            .zip(out.chunks_exact_mut(self.width))
        {
            for (word, chunk) in row.iter().zip(dst.chunks_mut(64)) {
                for (b, d) in chunk.iter_mut().enumerate() {
                    *d ^= (word >> b) & 1 == 1;
                }
            }
        }
        out
    }

    fn invert_in_place(&mut self) {
        let tail = self.tail_mask();
        let last = self.stride - 1;
        for row in self.words.chunks_exact_mut(self.stride) {
            for word in row.iter_mut() {
                *word = !*word;
            }
            row[last] &= tail;
        }
    }

    fn tail_mask(&self) -> u64 {
        match self.width % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    fn row(&self, y: usize) -> &[u64] {
        &self.words[y * self.stride..(y + 1) * self.stride]
    }

    fn row_mut(&mut self, y: usize) -> &mut [u64] {
        &mut self.words[y * self.stride..(y + 1) * self.stride]
    }
}

/// `dst[x] |= src[x + shift]` for every in-range `x` (negative shifts pull
/// from the left).
fn or_shifted(dst: &mut [u64], src: &[u64], shift: i64) {
    let n = src.len() as i64;
    let (q, r) = (shift.div_euclid(64), shift.rem_euclid(64) as u32);
    for (k, d) in dst.iter_mut().enumerate() {
        // bits of dst word k come from src bit positions 64k + shift ..
        let lo_idx = k as i64 + q;
        let lo = if (0..n).contains(&lo_idx) {
            src[lo_idx as usize]
        } else {
            0
        };
        let mut v = lo >> r;
        if r != 0 {
            let hi_idx = lo_idx + 1;
            let hi = if (0..n).contains(&hi_idx) {
                src[hi_idx as usize]
            } else {
                0
            };
            v |= hi << (64 - r);
        }
        *d |= v;
    }
}

fn dilate_bits(src: &BitRows, radius: u32) -> BitRows {
    if radius == 0 {
        return src.clone();
    }
    let chords = disk_chords(radius);
    let max_half = radius as usize;
    let tail = src.tail_mask();
    let last = src.stride - 1;

    // horizontal[w] = src dilated by the segment [-w, w]
    let mut horizontal: Vec<BitRows> = Vec::with_capacity(max_half + 1);
    horizontal.push(src.clone());
    for w in 1..=max_half {
        let mut next = horizontal[w - 1].clone();
        if chords.contains(&(w as u32)) || w < max_half {
            for y in 0..src.height {
                let row_in = src.row(y);
                let row_out = next.row_mut(y);
                or_shifted(row_out, row_in, w as i64);
                or_shifted(row_out, row_in, -(w as i64));
                row_out[last] &= tail;
            }
        }
        horizontal.push(next);
    }

    let r = radius as i64;
    let mut out = BitRows::zeros(src.width, src.height);
    for (k, &half) in chords.iter().enumerate() {
        let dy = k as i64 - r;
        let layer = &horizontal[half as usize];
        for y in 0..src.height as i64 {
            let sy = y + dy;
            if sy < 0 || sy >= src.height as i64 {
                continue;
            }
            for (d, s) in out
                .row_mut(y as usize)
                .iter_mut()
                .zip(layer.row(sy as usize))
            {
                *d |= s;
            }
        }
    }
    out
}

fn dilate_labels(src: &[bool], width: usize, height: usize, radius: u32) -> Vec<bool> {
    if radius == 0 {
        return src.to_vec();
    }
    dilate_bits(&BitRows::pack(src, width, height, false), radius).unpack(false)
}

fn erode_labels(src: &[bool], width: usize, height: usize, radius: u32) -> Vec<bool> {
    if radius == 0 {
        return src.to_vec();
    }
    // erosion is the complement of dilating the complement; packing keeps
    // the out-of-row tail at zero so the border never erodes
    dilate_bits(&BitRows::pack(src, width, height, true), radius).unpack(true)
}

pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    let (w, h) = mask.dimensions();
    let labels = dilate_labels(mask.labels(), w as usize, h as usize, radius);
    BinaryMask::from_parts_unchecked(w, h, labels)
}

pub fn erode(mask: &BinaryMask, radius: u32) -> BinaryMask {
    let (w, h) = mask.dimensions();
    let labels = erode_labels(mask.labels(), w as usize, h as usize, radius);
    BinaryMask::from_parts_unchecked(w, h, labels)
}

pub fn open(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    dilate(&erode(mask, radius), radius)
}

pub fn close(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dimensions();
    let labels = close_predicate(w, h, radius, |i| mask.labels()[i]);
    BinaryMask::from_parts_unchecked(w, h, labels)
}

/// Closing of the mask `pred(i)` without materializing it as booleans first.
pub(crate) fn close_predicate(
    width: u32,
    height: u32,
    radius: u32,
    pred: impl Fn(usize) -> bool,
) -> Vec<bool> {
    let packed = BitRows::from_predicate(width as usize, height as usize, pred);
    if radius == 0 {
        return packed.unpack(false);
    }
    let mut grown = dilate_bits(&packed, radius);
    grown.invert_in_place();
    dilate_bits(&grown, radius).unpack(true)
}

/// Drops 8-connected foreground components smaller than `min_area` pixels.
pub fn remove_small_components(mask: &BinaryMask, min_area: u64) -> BinaryMask {
    if min_area == 0 {
        return mask.clone();
    }
    let (labels, components) = connected_components_labeled(mask);
    let keep: Vec<bool> = components.iter().map(|c| c.area >= min_area).collect();
    let (w, h) = mask.dimensions();
    let out = labels
        .iter()
        .map(|&l| l != 0 && keep[l as usize - 1])
        .collect();
    BinaryMask::from_parts_unchecked(w, h, out)
}

/// Opening, then closing, then small-component removal. A zero radius or
/// area disables that stage.
pub fn morph_clean(mask: &BinaryMask, config: &MorphConfig) -> BinaryMask {
    let opened = open(mask, config.open_radius);
    let closed = close(&opened, config.close_radius);
    remove_small_components(&closed, config.min_component_area)
}
