use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResizeMode {
    Nearest,
    Bilinear,
}

fn check_target(w: u32, h: u32) -> Result<()> {
    if w == 0 || h == 0 {
        return Err(Error::param(
            "target size",
            format!("{w}x{h} is empty; both sides must be at least 1"),
        ));
    }
    Ok(())
}

/// Source index for destination index `d` under pixel-center alignment,
/// computed in integers so it is identical on every platform.
#[inline]
fn nearest_index(d: u32, src: u32, dst: u32) -> u32 {
    let s = ((2 * d as u64 + 1) * src as u64) / (2 * dst as u64);
    (s as u32).min(src - 1)
}

pub fn resize_image(
    image: &RgbImage,
    width: u32,
    height: u32,
    mode: ResizeMode,
) -> Result<RgbImage> {
    check_target(width, height)?;
    let (sw, sh) = image.dimensions();
    if (sw, sh) == (width, height) {
        return Ok(image.clone());
    }
    match mode {
        ResizeMode::Nearest => {
            let xs: Vec<u32> = (0..width).map(|x| nearest_index(x, sw, width)).collect();
            let ys: Vec<u32> = (0..height).map(|y| nearest_index(y, sh, height)).collect();
            RgbImage::from_fn(width, height, |x, y| {
                image.get(xs[x as usize], ys[y as usize])
            })
        }
        ResizeMode::Bilinear => {
            let taps = |dst: u32, src: u32| -> Vec<(u32, u32, f64)> {
                let scale = src as f64 / dst as f64;
                (0..dst)
                    .map(|d| {
                        let pos = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                        let i0 = pos.floor() as u32;
                        let i1 = (i0 + 1).min(src - 1);
                        (i0, i1, pos - i0 as f64)
                    })
                    .collect()
            };
            let xt = taps(width, sw);
            let yt = taps(height, sh);
            RgbImage::from_fn(width, height, |x, y| {
                let (x0, x1, fx) = xt[x as usize];
                let (y0, y1, fy) = yt[y as usize];
                let (p00, p10) = (image.get(x0, y0), image.get(x1, y0));
                let (p01, p11) = (image.get(x0, y1), image.get(x1, y1));
                let mut out = [0u8; 3];
                for c in 0..3 {
                    let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
                    let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
                    out[c] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
                }
                out
            })
        }
    }
}

/// Nearest-neighbor mask resize; masks are never interpolated.
pub fn resize_mask(mask: &BinaryMask, width: u32, height: u32) -> Result<BinaryMask> {
    check_target(width, height)?;
    let (sw, sh) = mask.dimensions();
    if (sw, sh) == (width, height) {
        return Ok(mask.clone());
    }
    let xs: Vec<u32> = (0..width).map(|x| nearest_index(x, sw, width)).collect();
    let ys: Vec<u32> = (0..height).map(|y| nearest_index(y, sh, height)).collect();
    BinaryMask::from_fn(width, height, |x, y| {
        mask.get(xs[x as usize], ys[y as usize])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_resize() {
        let img =
            RgbImage::from_fn(720, 720, |x, y| [(x % 256) as u8, (y % 256) as u8, 9]).unwrap();
        for mode in [ResizeMode::Nearest, ResizeMode::Bilinear] {
            assert_eq!(resize_image(&img, 720, 720, mode).unwrap(), img);
        }
    }

    #[test]
    fn checkerboard_upscale_nearest() {
        let img = RgbImage::from_fn(
            2,
            2,
            |x, y| if (x + y) % 2 == 0 { [255; 3] } else { [0; 3] },
        )
        .unwrap();
        let out = resize_image(&img, 4, 4, ResizeMode::Nearest).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(out.get(x, y), img.get(x / 2, y / 2));
            }
        }
    }

    #[test]
    fn bilinear_downscale_matches_sampling_oracle() {
        // value = 10x + 40y, so each 2x2 block averages to its center sample
        let img = RgbImage::from_fn(4, 4, |x, y| {
            let v = (10 * x + 40 * y) as u8;
            [v, 255 - v, 7]
        })
        .unwrap();
        let out = resize_image(&img, 2, 2, ResizeMode::Bilinear).unwrap();
        // block centers (0.5, 0.5), (2.5, 0.5), (0.5, 2.5), (2.5, 2.5):
        // 10*0.5+40*0.5 = 25, 45, 105, 125
        let expected = [[25u8, 45], [105, 125]];
        for y in 0..2 {
            for x in 0..2 {
                let v = expected[y as usize][x as usize];
                assert_eq!(out.get(x, y), [v, 255 - v, 7]);
            }
        }
    }

    #[test]
    fn zero_target_rejected() {
        let img = RgbImage::filled(3, 3, [1, 2, 3]).unwrap();
        assert!(resize_image(&img, 0, 3, ResizeMode::Nearest).is_err());
        let m = BinaryMask::new(3, 3, true).unwrap();
        assert!(resize_mask(&m, 3, 0).is_err());
    }

    #[test]
    fn integer_upscale_replicates_blocks() {
        let m = BinaryMask::from_fn(5, 3, |x, y| (x * 7 + y * 3) % 4 == 0).unwrap();
        for k in 1..5 {
            let up = resize_mask(&m, 5 * k, 3 * k).unwrap();
            for y in 0..3 * k {
                for x in 0..5 * k {
                    assert_eq!(up.get(x, y), m.get(x / k, y / k));
                }
            }
        }
    }
}
