//! RGB to HSV conversion on the hexcone model.
//!
//! Every component is on the unit interval. Hue is normalized to `[0, 1)`
//! with red at 0, green at 1/3 and blue at 2/3. Achromatic pixels
//! (`max == min`) get `h = 0, s = 0`, so any saturation gate rejects them
//! regardless of hue.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

pub fn rgb_to_hsv(rgb: [u8; 3]) -> HsvPixel {
    let [r, g, b] = rgb.map(i32::from);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max as f64 / 255.0;
    if max == min {
        return HsvPixel { h: 0.0, s: 0.0, v };
    }
    let delta = (max - min) as f64;
    let s = delta / max as f64;
    // sector offset in sixths of a turn, numerator kept integral until the divide
    let sixths = if max == r {
        let t = (g - b) as f64 / delta;
        if t < 0.0 {
            t + 6.0
        } else {
            t
        }
    } else if max == g {
        (b - r) as f64 / delta + 2.0
    } else {
        (r - g) as f64 / delta + 4.0
    };
    let mut h = sixths / 6.0;
    if h >= 1.0 {
        h -= 1.0;
    }
    HsvPixel { h, s, v }
}

/// Inverse hexcone conversion, rounding each channel to the nearest integer.
/// Components outside `[0, 1]` are clamped, hue wraps.
pub fn hsv_to_rgb(hsv: HsvPixel) -> [u8; 3] {
    let h = hsv.h.rem_euclid(1.0) * 6.0;
    let s = hsv.s.clamp(0.0, 1.0);
    let v = hsv.v.clamp(0.0, 1.0);
    let sector = (h.floor() as i32).min(5);
    let f = h - sector as f64;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match sector {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r, g, b].map(|c| (c * 255.0).round().clamp(0.0, 255.0) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn pure_green() {
        let p = rgb_to_hsv([0, 255, 0]);
        assert!((p.h - 1.0 / 3.0).abs() < EPS);
        assert_eq!(p.s, 1.0);
        assert_eq!(p.v, 1.0);
    }

    #[test]
    fn achromatic_gray() {
        let p = rgb_to_hsv([128, 128, 128]);
        assert_eq!(p.h, 0.0);
        assert_eq!(p.s, 0.0);
        assert!((p.v - 128.0 / 255.0).abs() < EPS);
    }

    #[test]
    fn orange_matches_reference_formula() {
        // Python colorsys.rgb_to_hsv(1.0, 128/255, 0.0)
        let p = rgb_to_hsv([255, 128, 0]);
        assert!((p.h - 0.08366013071895424).abs() < EPS);
        assert_eq!(p.s, 1.0);
        assert_eq!(p.v, 1.0);
    }

    #[test]
    fn hue_stays_below_one_near_red() {
        // magenta-ish red: negative sector wraps up to just below 1
        let p = rgb_to_hsv([255, 0, 1]);
        assert!(p.h < 1.0 && p.h > 0.99);
    }

    #[test]
    fn round_trip_on_lattice() {
        // 17^3 lattice: 0, 16, ..., 240, 255
        let steps: Vec<u8> = (0..17).map(|i| (i * 16).min(255) as u8).collect();
        for &r in &steps {
            for &g in &steps {
                for &b in &steps {
                    let back = hsv_to_rgb(rgb_to_hsv([r, g, b]));
                    for (a, o) in back.iter().zip([r, g, b]) {
                        assert!((*a as i32 - o as i32).abs() <= 1, "{r},{g},{b} -> {back:?}");
                    }
                }
            }
        }
    }
}
