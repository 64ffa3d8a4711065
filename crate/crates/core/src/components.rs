use serde::{Deserialize, Serialize};

use crate::raster::BinaryMask;

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: u32,
    pub min_y: u32,
    pub max_x: u32,
    pub max_y: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Component {
    pub area: u64,
    pub bbox: BoundingBox,
}

/// 8-connected foreground components in raster-scan order of their first pixel.
pub fn connected_components(mask: &BinaryMask) -> Vec<Component> {
    connected_components_labeled(mask).1
}

/// Returns a label raster (0 = background, `i + 1` = component `i`) and the
/// component list.
pub(crate) fn connected_components_labeled(mask: &BinaryMask) -> (Vec<u32>, Vec<Component>) {
    let (w, h) = mask.dimensions();
    let (wi, hi) = (w as i64, h as i64);
    let src = mask.labels();
    let mut labels = vec![0u32; src.len()];
    let mut components = Vec::new();
    let mut stack: Vec<usize> = Vec::new();

    for start in 0..src.len() {
        if !src[start] || labels[start] != 0 {
            continue;
        }
        let id = components.len() as u32 + 1;
        let (sx, sy) = ((start % w as usize) as u32, (start / w as usize) as u32);
        let mut comp = Component {
            area: 0,
            bbox: BoundingBox {
                min_x: sx,
                min_y: sy,
                max_x: sx,
                max_y: sy,
            },
        };
        labels[start] = id;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let x = (idx % w as usize) as i64;
            let y = (idx / w as usize) as i64;
            comp.area += 1;
            let b = &mut comp.bbox;
            b.min_x = b.min_x.min(x as u32);
            b.max_x = b.max_x.max(x as u32);
            b.min_y = b.min_y.min(y as u32);
            b.max_y = b.max_y.max(y as u32);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= wi || ny >= hi {
                        continue;
                    }
                    let n = (ny * wi + nx) as usize;
                    if src[n] && labels[n] == 0 {
                        labels[n] = id;
                        stack.push(n);
                    }
                }
            }
        }
        components.push(comp);
    }
    (labels, components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeSet, VecDeque};

    /// Queue-based flood fill over an explicit neighbor list.
    fn flood_fill_oracle(mask: &BinaryMask) -> BTreeSet<(u64, u32, u32, u32, u32)> {
        let (w, h) = mask.dimensions();
        let mut seen = vec![vec![false; w as usize]; h as usize];
        let mut out = BTreeSet::new();
        for y0 in 0..h {
            for x0 in 0..w {
                if !mask.get(x0, y0) || seen[y0 as usize][x0 as usize] {
                    continue;
                }
                let mut q = VecDeque::from([(x0, y0)]);
                seen[y0 as usize][x0 as usize] = true;
                let (mut area, mut bx0, mut by0, mut bx1, mut by1) = (0u64, x0, y0, x0, y0);
                while let Some((x, y)) = q.pop_front() {
                    area += 1;
                    bx0 = bx0.min(x);
                    by0 = by0.min(y);
                    bx1 = bx1.max(x);
                    by1 = by1.max(y);
                    let neighbors = [
                        (-1, -1),
                        (0, -1),
                        (1, -1),
                        (-1, 0),
                        (1, 0),
                        (-1, 1),
                        (0, 1),
                        (1, 1),
                    ];
                    for (dx, dy) in neighbors {
                        let nx = x as i32 + dx;
                        let ny = y as i32 + dy;
                        if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 {
                            continue;
                        }
                        let (nx, ny) = (nx as u32, ny as u32);
                        if mask.get(nx, ny) && !seen[ny as usize][nx as usize] {
                            seen[ny as usize][nx as usize] = true;
                            q.push_back((nx, ny));
                        }
                    }
                }
                out.insert((area, bx0, by0, bx1, by1));
            }
        }
        out
    }

    fn as_set(c: &[Component]) -> BTreeSet<(u64, u32, u32, u32, u32)> {
        c.iter()
            .map(|c| {
                (
                    c.area,
                    c.bbox.min_x,
                    c.bbox.min_y,
                    c.bbox.max_x,
                    c.bbox.max_y,
                )
            })
            .collect()
    }

    fn random_mask(rng: &mut ChaCha8Rng, side: u32, density: f64) -> BinaryMask {
        let labels = (0..side * side).map(|_| rng.random_bool(density)).collect();
        BinaryMask::from_labels(side, side, labels).unwrap()
    }

    #[test]
    fn empty_mask_has_no_components() {
        assert!(connected_components(&BinaryMask::new(5, 5, false).unwrap()).is_empty());
    }

    #[test]
    fn diagonal_pixels_join() {
        let mut m = BinaryMask::new(4, 4, false).unwrap();
        m.set(1, 1, true);
        m.set(2, 2, true);
        let c = connected_components(&m);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].area, 2);
        assert_eq!(
            c[0].bbox,
            BoundingBox {
                min_x: 1,
                min_y: 1,
                max_x: 2,
                max_y: 2
            }
        );
    }

    #[test]
    fn random_16x16_matches_flood_fill() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..50 {
            let m = random_mask(&mut rng, 16, 0.35);
            assert_eq!(as_set(&connected_components(&m)), flood_fill_oracle(&m));
        }
    }

    #[test]
    fn areas_sum_to_foreground_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for i in 0..1000 {
            let density = (i % 10) as f64 / 10.0;
            let m = random_mask(&mut rng, 32, density);
            let total: u64 = connected_components(&m).iter().map(|c| c.area).sum();
            assert_eq!(total, m.foreground_count() as u64);
        }
    }
}
