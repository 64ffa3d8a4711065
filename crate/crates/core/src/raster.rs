//! Dense raster types shared by every stage of the toolkit.
//!
//! All rasters are row-major with the origin at the top-left corner. They are
//! immutable once built apart from the explicit `set` helpers used while
//! constructing fixtures.

use crate::error::{Error, Result};

fn check_dims(width: u32, height: u32) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    Ok(width as usize * height as usize)
}

fn check_len(width: u32, height: u32, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::BufferLength {
            width,
            height,
            expected,
            actual,
        });
    }
    Ok(())
}

/// 8-bit RGB image, stored as interleaved `r, g, b` bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        let n = check_dims(width, height)?;
        check_len(width, height, n * 3, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image filled with a single color.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        let n = check_dims(width, height)?;
        let data = rgb.iter().copied().cycle().take(n * 3).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> Result<Self> {
        let n = check_dims(width, height)?;
        let mut data = Vec::with_capacity(n * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }
}

/// Per-pixel two-class label raster. `true` marks the arm class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    labels: Vec<bool>,
}

impl BinaryMask {
    pub fn from_labels(width: u32, height: u32, labels: Vec<bool>) -> Result<Self> {
        let n = check_dims(width, height)?;
        check_len(width, height, n, labels.len())?;
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn new(width: u32, height: u32, value: bool) -> Result<Self> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            labels: vec![value; n],
        })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Result<Self> {
        let n = check_dims(width, height)?;
        let mut labels = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub(crate) fn from_parts_unchecked(width: u32, height: u32, labels: Vec<bool>) -> Self {
        debug_assert_eq!(labels.len(), width as usize * height as usize);
        Self {
            width,
            height,
            labels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let w = self.width as usize;
        self.labels[y as usize * w + x as usize] = value;
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn foreground_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn foreground_fraction(&self) -> f64 {
        self.foreground_count() as f64 / self.labels.len() as f64
    }

    pub fn is_empty(&self) -> bool {
        !self.labels.iter().any(|&l| l)
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            labels: self.labels.iter().map(|&l| !l).collect(),
        }
    }

    /// Exchange encoding: 0 for background, 255 for foreground.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.labels
            .iter()
            .map(|&l| if l { 255 } else { 0 })
            .collect()
    }

    /// Decodes 8-bit values, mapping anything >= 128 to foreground.
    pub fn from_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self> {
        let n = check_dims(width, height)?;
        check_len(width, height, n, bytes.len())?;
        Ok(Self {
            width,
            height,
            labels: bytes.iter().map(|&b| b >= crate::MASK_THRESHOLD).collect(),
        })
    }
}

/// Range image in millimeters; 0 means the sensor returned no measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    depths: Vec<u16>,
}

impl DepthImage {
    pub fn from_raw(width: u32, height: u32, depths: Vec<u16>) -> Result<Self> {
        let n = check_dims(width, height)?;
        check_len(width, height, n, depths.len())?;
        Ok(Self {
            width,
            height,
            depths,
        })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> u16) -> Result<Self> {
        let n = check_dims(width, height)?;
        let mut depths = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                depths.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            depths,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.depths[y as usize * self.width as usize + x as usize]
    }

    pub fn depths(&self) -> &[u16] {
        &self.depths
    }
}
