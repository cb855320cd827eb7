//! Canvas construction: kernel-weighted splatting of the fused point set,
//! the accumulation-support field, and hole-mask derivation.
//!
//! Accumulation is deterministic for any worker count: the canvas is split
//! into fixed row bands, points are binned to bands up front, and each band
//! deposits its contributions in ascending point order.

use rayon::prelude::*;

use crate::fusion::WeightedColoredPointSet;
use crate::grid::{Grid2, Rgb};
use crate::projection::{self, CanvasSpec, ProjectionCenter};

const BAND_ROWS: usize = 64;

/// 2D deposition kernel. A point lands at continuous (x, y); it deposits on
/// the integer window [floor(x) - r, floor(x) + r] x [floor(y) - r,
/// floor(y) + r], wrapped horizontally and clipped vertically, with the
/// kernel evaluated at the wrapped offset of each cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplatKernel {
    kind: KernelKind,
    radius_px: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Gaussian {
        sigma_px: f64,
    },
    /// Full weight on the single cell containing the splat position.
    Nearest,
}

impl SplatKernel {
    pub fn gaussian(sigma_px: f64, radius_px: usize) -> Self {
        assert!(sigma_px > 0.0, "gaussian sigma must be positive");
        SplatKernel {
            kind: KernelKind::Gaussian { sigma_px },
            radius_px,
        }
    }

    pub fn nearest() -> Self {
        SplatKernel {
            kind: KernelKind::Nearest,
            radius_px: 0,
        }
    }

    pub fn radius_px(&self) -> usize {
        self.radius_px
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn value(&self, dx: f64, dy: f64) -> f64 {
        match self.kind {
            KernelKind::Gaussian { sigma_px } => {
                (-(dx * dx + dy * dy) / (2.0 * sigma_px * sigma_px)).exp()
            }
            KernelKind::Nearest => 1.0,
        }
    }
}

/// Panoramic color buffer Y, accumulation field Z, and hole mask M
/// (true = hole, i.e. Z < tau).
#[derive(Debug, Clone)]
pub struct PanoCanvas {
    pub color: Grid2<Rgb>,
    pub support: Grid2<f64>,
    pub mask: Grid2<bool>,
    pub spec: CanvasSpec,
    /// The hole threshold this mask was derived with.
    pub tau: f64,
}

impl PanoCanvas {
    pub fn hole_fraction(&self) -> f64 {
        self.mask.data().iter().filter(|&&h| h).count() as f64 / self.mask.len() as f64
    }
}

#[derive(Debug)]
pub struct SplatOutcome {
    pub canvas: PanoCanvas,
    /// Points that coincided with the projection center and were dropped.
    pub skipped_points: usize,
}

/// Renders Q onto the canvas: Y(q) = sum(w K c) / (sum(w K) + epsilon),
/// Z(q) = sum(w K), M(q) = Z(q) < tau.
pub fn splat(
    q: &WeightedColoredPointSet,
    o: ProjectionCenter,
    spec: CanvasSpec,
    kernel: &SplatKernel,
    epsilon: f64,
    tau: f64,
) -> SplatOutcome {
    assert!(epsilon > 0.0, "epsilon must be positive");
    assert!(tau > 0.0, "tau must be positive");

    let projected: Vec<Option<(f64, f64)>> = q
        .points
        .par_iter()
        .map(|p| projection::project(o, spec, p.position).ok())
        .collect();
    let skipped_points = projected.iter().filter(|p| p.is_none()).count();

    let (w, h) = (spec.width(), spec.height());
    let r = kernel.radius_px() as i64;
    let n_bands = h.div_ceil(BAND_ROWS);

    // Bin point indices by the bands their row window touches; pushes happen
    // in ascending point order, which fixes the per-pixel summation order.
    let mut bands: Vec<Vec<u32>> = vec![Vec::new(); n_bands];
    for (i, proj) in projected.iter().enumerate() {
        if let Some((_, y)) = proj {
            let fy = y.floor() as i64;
            let row0 = (fy - r).max(0) as usize;
            let row1 = (fy + r).min(h as i64 - 1) as usize;
            for band in row0 / BAND_ROWS..=row1 / BAND_ROWS {
                bands[band].push(i as u32);
            }
        }
    }

    struct BandAccum {
        row0: usize,
        rows: usize,
        num: Vec<[f64; 3]>,
        z: Vec<f64>,
    }

    let accums: Vec<BandAccum> = bands
        .par_iter()
        .enumerate()
        .map(|(band, indices)| {
            let row0 = band * BAND_ROWS;
            let rows = BAND_ROWS.min(h - row0);
            let mut acc = BandAccum {
                row0,
                rows,
                num: vec![[0.0; 3]; rows * w],
                z: vec![0.0; rows * w],
            };
            for &i in indices {
                let point = &q.points[i as usize];
                let (x, y) = projected[i as usize].expect("binned points have projections");
                let fx = x.floor() as i64;
                let fy = y.floor() as i64;
                let lo_row = (fy - r).max(row0 as i64) as usize;
                let hi_row = (fy + r).min((row0 + rows) as i64 - 1);
                if hi_row < lo_row as i64 {
                    continue;
                }
                // Distinct wrapped columns of the window; a window wider than
                // the canvas visits each column once.
                let span = ((2 * r + 1) as usize).min(w);
                for row in lo_row..=hi_row as usize {
                    let dy = row as f64 - y;
                    let base = (row - row0) * w;
                    for k in 0..span {
                        let col = if span == w {
                            k
                        } else {
                            (fx - r + k as i64).rem_euclid(w as i64) as usize
                        };
                        let mut dx = (col as f64 - x).rem_euclid(w as f64);
                        if dx > w as f64 / 2.0 {
                            dx -= w as f64;
                        }
                        let kv = kernel.value(dx, dy);
                        let wk = point.weight * kv;
                        let cell = base + col;
                        acc.z[cell] += wk;
                        acc.num[cell][0] += wk * point.color.r;
                        acc.num[cell][1] += wk * point.color.g;
                        acc.num[cell][2] += wk * point.color.b;
                    }
                }
            }
            acc
        })
        .collect();

    let mut color = Grid2::new(w, h, Rgb::BLACK);
    let mut support = Grid2::new(w, h, 0.0f64);
    let mut mask = Grid2::new(w, h, true);
    for acc in &accums {
        for local in 0..acc.rows * w {
            let global = acc.row0 * w + local;
            let z = acc.z[local];
            support.data_mut()[global] = z;
            mask.data_mut()[global] = z < tau;
            let d = z + epsilon;
            color.data_mut()[global] = Rgb::new(
                acc.num[local][0] / d,
                acc.num[local][1] / d,
                acc.num[local][2] / d,
            );
        }
    }

    SplatOutcome {
        canvas: PanoCanvas {
            color,
            support,
            mask,
            spec,
            tau,
        },
        skipped_points,
    }
}

/// Histogram of the accumulation field, for choosing tau. Bin edges span
/// [min, max] uniformly; returns (lower edge, count) per bin.
pub fn support_histogram(canvas: &PanoCanvas, bins: usize) -> Vec<(f64, usize)> {
    assert!(bins >= 1, "need at least one bin");
    let lo = canvas
        .support
        .data()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = canvas
        .support
        .data()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &z in canvas.support.data() {
        let idx = if width > 0.0 {
            (((z - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + width * i as f64, c))
        .collect()
}
