//! Confidence filtering, local geometric variation, robust fusion weights,
//! and assembly of the global weighted colored point set.

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::Vec3;
use crate::grid::{Grid2, Rgb};
use crate::io::LiftedView;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("grid too small for finite differences: {width}x{height} (need at least 2x2)")]
    GridTooSmall { width: usize, height: usize },
    #[error("no pixel in any view passed the confidence threshold {tau_c}")]
    EmptyResult { tau_c: f64 },
}

/// One fused sample: world-frame position, source color, fusion weight.
#[derive(Debug, Clone, Copy)]
pub struct WeightedColoredPoint {
    pub position: Vec3,
    pub color: Rgb,
    pub weight: f64,
}

/// The global point set Q plus the camera centers it was built from.
#[derive(Debug, Clone)]
pub struct WeightedColoredPointSet {
    pub points: Vec<WeightedColoredPoint>,
    /// Camera centers in the unified frame, in manifest order; these feed
    /// the unified projection center.
    pub source_centers: Vec<Vec3>,
}

/// Monotonically decreasing robust function with resolved parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobustKind {
    Exp { sigma: f64 },
    Reciprocal,
}

/// Robust function selection before per-view sigma resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobustSpec {
    Exp(SigmaSpec),
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSpec {
    /// Median of the geometric variation over the view's valid pixels,
    /// floored at 1e-6.
    Auto,
    Fixed(f64),
}

const SIGMA_FLOOR: f64 = 1e-6;

/// Marks pixels whose confidence meets the threshold.
pub fn valid_pixels(confidence: &Grid2<f64>, tau_c: f64) -> Grid2<bool> {
    assert!((0.0..=1.0).contains(&tau_c), "tau_c must be in [0, 1]");
    confidence.map(|&c| c >= tau_c)
}

/// Local geometric variation: Frobenius norm of the finite-difference
/// gradient [dP/du, dP/dv]. Central differences in the interior, one-sided
/// at borders.
pub fn geometric_variation(points: &Grid2<Vec3>) -> Result<Grid2<f64>, FusionError> {
    let (w, h) = (points.width(), points.height());
    if w < 2 || h < 2 {
        return Err(FusionError::GridTooSmall {
            width: w,
            height: h,
        });
    }
    let mut out = Grid2::new(w, h, 0.0f64);
    for v in 0..h {
        for u in 0..w {
            let du = if u == 0 {
                *points.get(1, v) - *points.get(0, v)
            } else if u == w - 1 {
                *points.get(w - 1, v) - *points.get(w - 2, v)
            } else {
                (*points.get(u + 1, v) - *points.get(u - 1, v)) * 0.5
            };
            let dv = if v == 0 {
                *points.get(u, 1) - *points.get(u, 0)
            } else if v == h - 1 {
                *points.get(u, h - 1) - *points.get(u, h - 2)
            } else {
                (*points.get(u, v + 1) - *points.get(u, v - 1)) * 0.5
            };
            *out.get_mut(u, v) = (du.dot(du) + dv.dot(dv)).sqrt();
        }
    }
    Ok(out)
}

/// rho(s): exp(-s/sigma) or 1/(1+s); in (0, 1] for s >= 0.
pub fn robust_weight(kind: RobustKind, s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    match kind {
        RobustKind::Exp { sigma } => (-s / sigma).exp(),
        RobustKind::Reciprocal => 1.0 / (1.0 + s),
    }
}

/// Fuses views into the global weighted colored point set.
///
/// Per view: transform the point map into the unified frame, compute the
/// geometric variation on the transformed map, keep pixels whose confidence
/// passes `tau_c`, and weight each kept pixel by confidence times the robust
/// function. Output order is views in input order, pixels row-major, so the
/// result is deterministic.
pub fn build_point_set(
    views: &[LiftedView],
    tau_c: f64,
    spec: RobustSpec,
) -> Result<WeightedColoredPointSet, FusionError> {
    assert!(!views.is_empty(), "build_point_set needs at least one view");
    assert!((0.0..=1.0).contains(&tau_c), "tau_c must be in [0, 1]");

    let per_view: Vec<Vec<WeightedColoredPoint>> = views
        .par_iter()
        .map(|view| view_points(view, tau_c, spec))
        .collect::<Result<_, _>>()?;

    let points: Vec<WeightedColoredPoint> = per_view.into_iter().flatten().collect();
    if points.is_empty() {
        return Err(FusionError::EmptyResult { tau_c });
    }
    Ok(WeightedColoredPointSet {
        points,
        source_centers: views.iter().map(|v| v.pose.translation()).collect(),
    })
}

fn view_points(
    view: &LiftedView,
    tau_c: f64,
    spec: RobustSpec,
) -> Result<Vec<WeightedColoredPoint>, FusionError> {
    let world = view.points.map(|&p| view.pose.transform_point(p));
    let variation = geometric_variation(&world)?;
    let valid = valid_pixels(&view.confidence, tau_c);

    let kind = match spec {
        RobustSpec::Reciprocal => RobustKind::Reciprocal,
        RobustSpec::Exp(SigmaSpec::Fixed(sigma)) => {
            assert!(sigma > 0.0, "fixed sigma must be positive");
            RobustKind::Exp { sigma }
        }
        RobustSpec::Exp(SigmaSpec::Auto) => {
            let mut s_valid: Vec<f64> = variation
                .data()
                .iter()
                .zip(valid.data())
                .filter(|(_, &ok)| ok)
                .map(|(&s, _)| s)
                .collect();
            if s_valid.is_empty() {
                return Ok(Vec::new());
            }
            RobustKind::Exp {
                sigma: median(&mut s_valid).max(SIGMA_FLOOR),
            }
        }
    };

    let mut out = Vec::new();
    for (i, &ok) in valid.data().iter().enumerate() {
        if !ok {
            continue;
        }
        out.push(WeightedColoredPoint {
            position: world.data()[i],
            color: view.image.data()[i],
            weight: view.confidence.data()[i] * robust_weight(kind, variation.data()[i]),
        });
    }
    Ok(out)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
