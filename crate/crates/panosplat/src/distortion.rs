//! Homography distortion analysis: rotation normalization, affine/projective
//! factorization, the closed-form Jacobian-determinant field, and its
//! rasterization for heatmap export.
//!
//! A plane homography normalized to h33 = 1 can be rotated in source
//! coordinates so its (3,2) entry vanishes; the rotated map factors into an
//! affine part with constant area scaling s_A and a pure projective part
//! whose area scaling is 1/(1 - c u)^3, diverging on the horizon line.

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::Mat3;
use crate::grid::Grid2;

/// Singularity guard for |det H| and the h33 normalizer.
const SINGULAR_TOL: f64 = 1e-12;
/// Distance from the horizon at which the Jacobian is considered divergent.
const HORIZON_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DistortionError {
    #[error("homography is singular or cannot be normalized (|{what}| = {value:.3e})")]
    SingularHomography { what: &'static str, value: f64 },
    #[error("horizon singularity: |1 - c*u| = {denom:.3e} at u = {u}")]
    HorizonSingularity { u: f64, denom: f64 },
}

/// Non-singular 3x3 projective map, normalized so h33 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    h: Mat3,
}

impl Homography {
    pub fn new(m: Mat3) -> Result<Self, DistortionError> {
        let corner = m.m[2][2];
        if corner.abs() < SINGULAR_TOL {
            return Err(DistortionError::SingularHomography {
                what: "h33",
                value: corner.abs(),
            });
        }
        let mut h = m;
        for row in h.m.iter_mut() {
            for v in row.iter_mut() {
                *v /= corner;
            }
        }
        let det = h.det();
        if det.abs() < SINGULAR_TOL {
            return Err(DistortionError::SingularHomography {
                what: "det",
                value: det.abs(),
            });
        }
        Ok(Homography { h })
    }

    pub fn matrix(&self) -> Mat3 {
        self.h
    }
}

/// The rotated-coordinate form: source axes rotated by `beta` so the (3,2)
/// entry of `h_rot` is zero; `c` is the projective strength and `s_a` the
/// constant Jacobian determinant of the affine factor.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedHomography {
    pub beta: f64,
    pub c: f64,
    pub h_rot: Mat3,
    pub s_a: f64,
}

impl NormalizedHomography {
    /// The full rotated map (u, v) -> (x', y').
    pub fn map_point(&self, u: f64, v: f64) -> Result<(f64, f64), DistortionError> {
        let m = self.h_rot.m;
        let denom = m[2][0] * u + m[2][1] * v + 1.0;
        if denom.abs() <= HORIZON_TOL {
            return Err(DistortionError::HorizonSingularity {
                u,
                denom: denom.abs(),
            });
        }
        Ok((
            (m[0][0] * u + m[0][1] * v + m[0][2]) / denom,
            (m[1][0] * u + m[1][1] * v + m[1][2]) / denom,
        ))
    }
}

/// Rotates source coordinates by beta = atan2(-h8, -h7), nullifying the
/// (3,2) entry. For a pure affine input (c below tolerance) beta is 0.
pub fn normalize_rotation(h: &Homography) -> NormalizedHomography {
    let m = h.h.m;
    let (h7, h8) = (m[2][0], m[2][1]);
    let c = (h7 * h7 + h8 * h8).sqrt();
    let (beta, h_rot) = if c < SINGULAR_TOL {
        (0.0, h.h)
    } else {
        // + 0.0 folds IEEE negative zero into plain zero.
        let beta = (-h8).atan2(-h7) + 0.0;
        let (s, cb) = beta.sin_cos();
        let rot = Mat3::new([[cb, -s, 0.0], [s, cb, 0.0], [0.0, 0.0, 1.0]]);
        let mut r = h.h.mul_mat(rot);
        // The (3,1) entry is -c and (3,2) is 0 exactly; write them down to
        // keep rounding out of the factored forms.
        r.m[2][0] = -c;
        r.m[2][1] = 0.0;
        (beta, r)
    };
    let r = h_rot.m;
    let s_a = (r[0][0] + c * r[0][2]) * r[1][1] - (r[1][0] + c * r[1][2]) * r[0][1];
    NormalizedHomography {
        beta,
        c: if c < SINGULAR_TOL { 0.0 } else { c },
        h_rot,
        s_a,
    }
}

/// Splits the rotated homography into H_A (affine) and H_P (pure projective)
/// with H_A * H_P = H_rot.
pub fn factor_affine_projective(n: &NormalizedHomography) -> (Mat3, Mat3) {
    let r = n.h_rot.m;
    let c = n.c;
    let h_a = Mat3::new([
        [r[0][0] + c * r[0][2], r[0][1], r[0][2]],
        [r[1][0] + c * r[1][2], r[1][1], r[1][2]],
        [0.0, 0.0, 1.0],
    ]);
    let h_p = Mat3::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-c, 0.0, 1.0]]);
    (h_a, h_p)
}

/// Closed-form local area scaling: s_A / (1 - c*u)^3. `v` does not enter;
/// the signature keeps the full field interface.
pub fn jacobian_det(n: &NormalizedHomography, u: f64, _v: f64) -> Result<f64, DistortionError> {
    let denom = 1.0 - n.c * u;
    if denom.abs() <= HORIZON_TOL {
        return Err(DistortionError::HorizonSingularity {
            u,
            denom: denom.abs(),
        });
    }
    Ok(n.s_a / (denom * denom * denom))
}

/// |det J| rasterized at pixel centers in rotated coordinates. Horizon
/// pixels diverge; they are replaced by the largest finite value in the
/// field so the export stays finite.
pub fn distortion_field(n: &NormalizedHomography, width: usize, height: usize) -> Grid2<f64> {
    assert!(width >= 1 && height >= 1);
    let rows: Vec<Vec<f64>> = (0..height)
        .into_par_iter()
        .map(|j| {
            (0..width)
                .map(|i| match jacobian_det(n, i as f64 + 0.5, j as f64 + 0.5) {
                    Ok(d) => d.abs(),
                    Err(_) => f64::INFINITY,
                })
                .collect()
        })
        .collect();
    let mut data: Vec<f64> = rows.into_iter().flatten().collect();
    let finite_max = data
        .iter()
        .copied()
        .filter(|d| d.is_finite())
        .fold(0.0f64, f64::max);
    for d in &mut data {
        if !d.is_finite() {
            *d = finite_max;
        }
    }
    Grid2::from_raw(width, height, data)
}
