//! Pull-push multiresolution hole fill.
//!
//! Pull: repeatedly 2x-downsample the observed pixels, carrying the count of
//! observed contributors as the support weight, until a level has no hole.
//! Push: walk back down, filling each hole from a bilinear sample of the
//! coarser (fully defined) level. Observed pixels pass through untouched.

use crate::grid::{Grid2, Rgb};

struct Level {
    width: usize,
    height: usize,
    color: Vec<[f64; 3]>,
    weight: Vec<f64>,
}

/// Fills hole pixels from coarser scales; `None` if nothing is observed.
pub(crate) fn fill(canvas: &Grid2<Rgb>, mask: &Grid2<bool>) -> Option<Grid2<Rgb>> {
    assert!(canvas.same_size(mask));
    if !mask.data().iter().any(|&h| h) {
        return Some(canvas.clone());
    }
    if mask.data().iter().all(|&h| h) {
        return None;
    }

    let base = Level {
        width: canvas.width(),
        height: canvas.height(),
        color: canvas.data().iter().map(|c| [c.r, c.g, c.b]).collect(),
        weight: mask
            .data()
            .iter()
            .map(|&h| if h { 0.0 } else { 1.0 })
            .collect(),
    };
    let mut levels = vec![base];
    while levels.last().unwrap().weight.contains(&0.0) {
        let top = levels.last().unwrap();
        if top.width == 1 && top.height == 1 {
            // Unreachable given an observed pixel exists: its count
            // propagates all the way up.
            return None;
        }
        levels.push(downsample(top));
    }

    // Fill holes coarse-to-fine; each level below the top samples the level
    // above, which is fully defined by the time it is read.
    for k in (0..levels.len() - 1).rev() {
        let (fine, coarse) = {
            let (lo, hi) = levels.split_at_mut(k + 1);
            (&mut lo[k], &hi[0])
        };
        for j in 0..fine.height {
            for i in 0..fine.width {
                let idx = j * fine.width + i;
                if fine.weight[idx] == 0.0 {
                    fine.color[idx] = bilinear(coarse, i, j);
                }
            }
        }
    }

    let level0 = &levels[0];
    let data = level0
        .color
        .iter()
        .map(|c| Rgb::new(c[0], c[1], c[2]))
        .collect();
    Some(Grid2::from_raw(level0.width, level0.height, data))
}

fn downsample(fine: &Level) -> Level {
    let width = fine.width.div_ceil(2);
    let height = fine.height.div_ceil(2);
    let mut color = vec![[0.0; 3]; width * height];
    let mut weight = vec![0.0; width * height];
    for j in 0..height {
        for i in 0..width {
            let mut acc = [0.0; 3];
            let mut w_sum = 0.0;
            for (ci, cj) in [
                (2 * i, 2 * j),
                (2 * i + 1, 2 * j),
                (2 * i, 2 * j + 1),
                (2 * i + 1, 2 * j + 1),
            ] {
                if ci < fine.width && cj < fine.height {
                    let c = cj * fine.width + ci;
                    let w = fine.weight[c];
                    acc[0] += w * fine.color[c][0];
                    acc[1] += w * fine.color[c][1];
                    acc[2] += w * fine.color[c][2];
                    w_sum += w;
                }
            }
            let idx = j * width + i;
            weight[idx] = w_sum;
            if w_sum > 0.0 {
                color[idx] = [acc[0] / w_sum, acc[1] / w_sum, acc[2] / w_sum];
            }
        }
    }
    Level {
        width,
        height,
        color,
        weight,
    }
}

/// Bilinear sample of the coarse level at the center of fine pixel (i, j).
fn bilinear(coarse: &Level, i: usize, j: usize) -> [f64; 3] {
    let sample_axis = |p: usize, extent: usize| -> (usize, usize, f64) {
        let c = (p as f64 + 0.5) / 2.0 - 0.5;
        let c0 = c.floor();
        let frac = c - c0;
        let i0 = (c0.max(0.0) as usize).min(extent - 1);
        let i1 = (i0 + 1).min(extent - 1);
        (i0, i1, if c0 < 0.0 { 0.0 } else { frac })
    };
    let (x0, x1, fx) = sample_axis(i, coarse.width);
    let (y0, y1, fy) = sample_axis(j, coarse.height);
    let at = |x: usize, y: usize| coarse.color[y * coarse.width + x];
    let mut out = [0.0; 3];
    for (ch, o) in out.iter_mut().enumerate() {
        let top = at(x0, y0)[ch] * (1.0 - fx) + at(x1, y0)[ch] * fx;
        let bot = at(x0, y1)[ch] * (1.0 - fx) + at(x1, y1)[ch] * fx;
        *o = top * (1.0 - fy) + bot * fy;
    }
    out
}
