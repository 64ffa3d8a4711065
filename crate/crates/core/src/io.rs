//! PNG/JPEG raster I/O in the toolkit's exchange formats.
//!
//! * color images: any 8-bit PNG/JPEG, converted to RGB on load;
//! * masks: single-channel 8-bit PNG, 0 = background, 255 = foreground;
//!   values >= 128 load as foreground;
//! * depth: single-channel 16-bit PNG in millimeters, 0 = missing;
//! * heatmaps: single-channel 16-bit PNG, `round(occupancy * 65535)`.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, ImageFormat, ImageReader, Luma};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, DepthImage, RgbImage};

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn save(path: &Path, img: DynamicImage) -> Result<()> {
    let format = ImageFormat::from_path(path).unwrap_or(ImageFormat::Png);
    img.save_with_format(path, format)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn color_type_name(img: &DynamicImage) -> String {
    format!("{:?}", img.color())
}

/// Loads an 8-bit color or gray image as RGB. 16-bit and float rasters are
/// rejected so a depth map is never silently read as a color frame.
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = decode(path)?;
    if !matches!(
        img,
        DynamicImage::ImageRgb8(_)
            | DynamicImage::ImageRgba8(_)
            | DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
    ) {
        return Err(format_err(
            path,
            format!("color image must be 8-bit, found {}", color_type_name(&img)),
        ));
    }
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    RgbImage::from_raw(w, h, rgb.into_raw())
}

/// Reads only the header to get `(width, height)`.
pub fn image_dimensions(path: &Path) -> Result<(u32, u32)> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.into_dimensions().map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_rgb(path: &Path, image: &RgbImage) -> Result<()> {
    let buf = image::RgbImage::from_raw(image.width(), image.height(), image.as_raw().to_vec())
        .expect("RgbImage buffer length is validated at construction");
    save(path, DynamicImage::ImageRgb8(buf))
}

pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    match decode(path)? {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            BinaryMask::from_bytes(w, h, buf.as_raw())
        }
        other => Err(format_err(
            path,
            format!(
                "mask must be single-channel 8-bit, found {}",
                color_type_name(&other)
            ),
        )),
    }
}

pub fn save_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let buf = GrayImage::from_raw(mask.width(), mask.height(), mask.to_bytes())
        .expect("mask buffer length is validated at construction");
    save(path, DynamicImage::ImageLuma8(buf))
}

pub fn load_depth(path: &Path) -> Result<DepthImage> {
    match decode(path)? {
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            DepthImage::from_raw(w, h, buf.into_raw())
        }
        other => Err(format_err(
            path,
            format!(
                "depth map must be single-channel 16-bit, found {}",
                color_type_name(&other)
            ),
        )),
    }
}

pub fn save_depth(path: &Path, depth: &DepthImage) -> Result<()> {
    save_luma16(path, depth.width(), depth.height(), depth.depths().to_vec())
}

pub(crate) fn save_luma16(path: &Path, width: u32, height: u32, values: Vec<u16>) -> Result<()> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(width, height, values)
        .ok_or_else(|| format_err(path, "16-bit buffer length does not match dimensions"))?;
    // 16-bit data is only representable in PNG here
    DynamicImage::ImageLuma16(buf)
        .save_with_format(path, ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn load_luma16(path: &Path) -> Result<(u32, u32, Vec<u16>)> {
    match decode(path)? {
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            Ok((w, h, buf.into_raw()))
        }
        other => Err(format_err(
            path,
            format!(
                "expected single-channel 16-bit, found {}",
                color_type_name(&other)
            ),
        )),
    }
}
