//! Diffusion fill: hole pixels converge to the discrete Laplace equation
//! with observed pixels as fixed Dirichlet boundary.
//!
//! Jacobi sweeps (not Gauss-Seidel) so parallel execution is deterministic.
//! Holes are initialized coarse-to-fine: the problem is solved on a
//! 2x-downsampled grid first and upsampled, which leaves the fixed point
//! untouched but lets the final full-resolution Jacobi iteration reach the
//! update tolerance in few sweeps even for large holes. Every initial and
//! iterated value is clamped to the range of the hole-adjacent observed
//! pixels, so the per-channel maximum principle holds exactly at any
//! iteration count.

use rayon::prelude::*;

use crate::grid::{Grid2, Rgb};

/// Below this pixel count the init is solved directly, ending the recursion.
const BASE_PIXELS: usize = 256;
const INIT_SWEEPS: usize = 60;

/// Fills hole pixels by relaxation; `None` if nothing is observed.
pub(crate) fn fill(
    canvas: &Grid2<Rgb>,
    mask: &Grid2<bool>,
    max_iters: usize,
    tol: f64,
) -> Option<Grid2<Rgb>> {
    assert!(canvas.same_size(mask));
    assert!(max_iters >= 1, "max_iters must be at least 1");
    assert!(tol > 0.0, "tol must be positive");

    if !mask.data().iter().any(|&h| h) {
        return Some(canvas.clone());
    }
    if mask.data().iter().all(|&h| h) {
        return None;
    }

    let mut problem = Problem::new(canvas, mask);
    problem.init_coarse_to_fine();
    problem.jacobi(max_iters, tol);

    let mut out = canvas.clone();
    for &idx in &problem.holes {
        let c = problem.values[idx];
        out.data_mut()[idx] = Rgb::new(c[0], c[1], c[2]);
    }
    Some(out)
}

struct Problem {
    width: usize,
    height: usize,
    values: Vec<[f64; 3]>,
    holes: Vec<usize>,
    hole_set: Vec<bool>,
    /// Per-channel [min, max] over observed pixels adjacent to a hole.
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Problem {
    fn new(canvas: &Grid2<Rgb>, mask: &Grid2<bool>) -> Self {
        let (w, h) = (canvas.width(), canvas.height());
        let hole_set: Vec<bool> = mask.data().to_vec();
        let holes: Vec<usize> = hole_set
            .iter()
            .enumerate()
            .filter(|(_, &hole)| hole)
            .map(|(i, _)| i)
            .collect();
        let values: Vec<[f64; 3]> = canvas.data().iter().map(|c| [c.r, c.g, c.b]).collect();

        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for (idx, &hole) in hole_set.iter().enumerate() {
            if hole {
                continue;
            }
            let (u, v) = (idx % w, idx / w);
            let touches = (u > 0 && hole_set[idx - 1])
                || (u + 1 < w && hole_set[idx + 1])
                || (v > 0 && hole_set[idx - w])
                || (v + 1 < h && hole_set[idx + w]);
            if touches {
                for (ch, val) in values[idx].into_iter().enumerate() {
                    lo[ch] = lo[ch].min(val);
                    hi[ch] = hi[ch].max(val);
                }
            }
        }

        Problem {
            width: w,
            height: h,
            values,
            holes,
            hole_set,
            lo,
            hi,
        }
    }

    fn clamp(&self, c: [f64; 3]) -> [f64; 3] {
        [
            c[0].clamp(self.lo[0], self.hi[0]),
            c[1].clamp(self.lo[1], self.hi[1]),
            c[2].clamp(self.lo[2], self.hi[2]),
        ]
    }

    /// Seeds hole values from the solution of the 2x-downsampled problem.
    fn init_coarse_to_fine(&mut self) {
        // Downsampling can absorb all holes (a coarse pixel is observed if
        // any child is), leaving nothing to initialize.
        if self.holes.is_empty() {
            return;
        }
        if self.width * self.height <= BASE_PIXELS {
            // Base case: flood with the mean of the observed pixels.
            let mut mean = [0.0f64; 3];
            let mut n = 0.0;
            for (idx, &hole) in self.hole_set.iter().enumerate() {
                if !hole {
                    for (m, v) in mean.iter_mut().zip(self.values[idx]) {
                        *m += v;
                    }
                    n += 1.0;
                }
            }
            let mean = self.clamp([mean[0] / n, mean[1] / n, mean[2] / n]);
            for &idx in &self.holes {
                self.values[idx] = mean;
            }
            self.jacobi(INIT_SWEEPS, 1e-9);
            return;
        }

        // Coarse pixel: observed if any child is observed, color = mean of
        // observed children.
        let cw = self.width.div_ceil(2);
        let ch_ = self.height.div_ceil(2);
        let mut coarse_color = Grid2::new(cw, ch_, Rgb::BLACK);
        let mut coarse_mask = Grid2::new(cw, ch_, true);
        for j in 0..ch_ {
            for i in 0..cw {
                let mut acc = [0.0f64; 3];
                let mut n = 0.0;
                for (fi, fj) in [
                    (2 * i, 2 * j),
                    (2 * i + 1, 2 * j),
                    (2 * i, 2 * j + 1),
                    (2 * i + 1, 2 * j + 1),
                ] {
                    if fi < self.width && fj < self.height {
                        let idx = fj * self.width + fi;
                        if !self.hole_set[idx] {
                            for (k, acc_k) in acc.iter_mut().enumerate() {
                                *acc_k += self.values[idx][k];
                            }
                            n += 1.0;
                        }
                    }
                }
                if n > 0.0 {
                    *coarse_mask.get_mut(i, j) = false;
                    *coarse_color.get_mut(i, j) = Rgb::new(acc[0] / n, acc[1] / n, acc[2] / n);
                }
            }
        }

        let mut coarse = Problem::new(&coarse_color, &coarse_mask);
        coarse.init_coarse_to_fine();
        coarse.jacobi(INIT_SWEEPS, 1e-9);

        // Bilinear upsample of the coarse solution into the fine holes.
        let sample_axis = |p: usize, extent: usize| -> (usize, usize, f64) {
            let c = (p as f64 + 0.5) / 2.0 - 0.5;
            let c0 = c.floor();
            let frac = c - c0;
            let i0 = (c0.max(0.0) as usize).min(extent - 1);
            let i1 = (i0 + 1).min(extent - 1);
            (i0, i1, if c0 < 0.0 { 0.0 } else { frac })
        };
        for &idx in &self.holes {
            let (u, v) = (idx % self.width, idx / self.width);
            let (x0, x1, fx) = sample_axis(u, cw);
            let (y0, y1, fy) = sample_axis(v, ch_);
            let at = |x: usize, y: usize| coarse.values[y * cw + x];
            let mut c = [0.0f64; 3];
            for (k, c_k) in c.iter_mut().enumerate() {
                let top = at(x0, y0)[k] * (1.0 - fx) + at(x1, y0)[k] * fx;
                let bot = at(x0, y1)[k] * (1.0 - fx) + at(x1, y1)[k] * fx;
                *c_k = top * (1.0 - fy) + bot * fy;
            }
            self.values[idx] = self.clamp(c);
        }
    }

    /// Jacobi relaxation over the holes until the largest per-channel update
    /// drops below `tol` or `max_iters` sweeps have run.
    fn jacobi(&mut self, max_iters: usize, tol: f64) {
        if self.holes.is_empty() {
            return;
        }
        let w = self.width;
        let h = self.height;
        let neighbor_lists: Vec<[Option<usize>; 4]> = self
            .holes
            .iter()
            .map(|&idx| {
                let (u, v) = (idx % w, idx / w);
                [
                    (u > 0).then(|| idx - 1),
                    (u + 1 < w).then(|| idx + 1),
                    (v > 0).then(|| idx - w),
                    (v + 1 < h).then(|| idx + w),
                ]
            })
            .collect();

        for _ in 0..max_iters {
            let values = &self.values;
            let updates: Vec<[f64; 3]> = neighbor_lists
                .par_iter()
                .map(|ns| {
                    let mut acc = [0.0f64; 3];
                    let mut count = 0.0;
                    for &n in ns.iter().flatten() {
                        let c = values[n];
                        acc[0] += c[0];
                        acc[1] += c[1];
                        acc[2] += c[2];
                        count += 1.0;
                    }
                    self.clamp([acc[0] / count, acc[1] / count, acc[2] / count])
                })
                .collect();
            let mut max_update = 0.0f64;
            for (k, &idx) in self.holes.iter().enumerate() {
                for (new, old) in updates[k].iter().zip(self.values[idx]) {
                    max_update = max_update.max((new - old).abs());
                }
                self.values[idx] = updates[k];
            }
            if max_update < tol {
                break;
            }
        }
    }
}
