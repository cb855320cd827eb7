//! Unified projection center, angular parameterization, and the equidistant
//! cylindrical projection onto canvas coordinates.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geom::Vec3;

/// Points closer to the center than this cannot be given a direction.
pub const DEGENERATE_RADIUS: f64 = 1e-12;
/// Default stabilizer for near-pole rays in [`cylinder_intersection`].
pub const DEFAULT_EPSILON: f64 = 1e-8;
/// Default cylinder radius. The canvas map depends on angles only, so the
/// radius matters just for the manifold-consistency checks.
pub const DEFAULT_RADIUS: f64 = 1.0;

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("cannot average an empty list of camera centers")]
    EmptyList,
    #[error("point coincides with the projection center (|X - O| < {DEGENERATE_RADIUS})")]
    DegenerateDirection,
}

/// The single virtual optical center all points are parameterized around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionCenter {
    pub origin: Vec3,
}

/// Panoramic canvas resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanvasSpec {
    width: usize,
    height: usize,
}

impl CanvasSpec {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 2 && height >= 2, "canvas must be at least 2x2");
        CanvasSpec { width, height }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

/// Azimuth in (-pi, pi] and elevation in [-pi/2, pi/2]; at the poles
/// (d_x = d_y = 0) the azimuth is 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularCoords {
    pub theta: f64,
    pub phi: f64,
}

/// Arithmetic mean of the camera centers.
pub fn projection_center(source_centers: &[Vec3]) -> Result<ProjectionCenter, ProjectionError> {
    if source_centers.is_empty() {
        return Err(ProjectionError::EmptyList);
    }
    let sum = source_centers.iter().fold(Vec3::ZERO, |acc, &c| acc + c);
    Ok(ProjectionCenter {
        origin: sum / source_centers.len() as f64,
    })
}

/// Azimuth/elevation of the direction from the center to `x`.
pub fn direction_angles(o: ProjectionCenter, x: Vec3) -> Result<AngularCoords, ProjectionError> {
    let d = x - o.origin;
    if d.norm() < DEGENERATE_RADIUS {
        return Err(ProjectionError::DegenerateDirection);
    }
    Ok(AngularCoords {
        theta: d.y.atan2(d.x),
        phi: d.z.atan2((d.x * d.x + d.y * d.y).sqrt()),
    })
}

/// Intersection of the ray from the center through `x` with the cylinder of
/// radius `radius` around the vertical axis through the center. `epsilon`
/// caps the blow-up for near-pole rays that never meet the cylinder.
pub fn cylinder_intersection(
    o: ProjectionCenter,
    x: Vec3,
    radius: f64,
    epsilon: f64,
) -> Result<Vec3, ProjectionError> {
    assert!(radius > 0.0, "cylinder radius must be positive");
    let d = x - o.origin;
    if d.norm() < DEGENERATE_RADIUS {
        return Err(ProjectionError::DegenerateDirection);
    }
    let d_xy = (d.x * d.x + d.y * d.y).sqrt();
    let alpha = radius / (d_xy + epsilon);
    Ok(o.origin + d * alpha)
}

/// Equidistant cylindrical projection to continuous canvas coordinates:
/// x in [0, W) with wrap-around, y in [0, H).
pub fn project(
    o: ProjectionCenter,
    spec: CanvasSpec,
    x: Vec3,
) -> Result<(f64, f64), ProjectionError> {
    let angles = direction_angles(o, x)?;
    let w = spec.width() as f64;
    let h = spec.height() as f64;

    let mut cx = w / (2.0 * PI) * (angles.theta + PI);
    // theta = pi maps to exactly W; fold it onto the seam.
    cx = cx.rem_euclid(w);
    if cx >= w {
        cx = 0.0;
    }

    let mut cy = h / PI * (PI / 2.0 - angles.phi);
    // phi = -pi/2 lands exactly on H; keep the pixel index in range.
    if cy >= h {
        cy = h.next_down();
    }
    if cy < 0.0 {
        cy = 0.0;
    }
    Ok((cx, cy))
}

/// Debug-mode plain cylindrical comparator: x from azimuth as in
/// [`project`], but y taken from the axial height directly (parallel
/// projection onto the cylinder at true heights), mapping
/// [-half_height, half_height] linearly onto [H, 0). Points outside the
/// height band return `None`. Not used by the render path.
pub fn project_plain_cylindrical(
    o: ProjectionCenter,
    spec: CanvasSpec,
    x: Vec3,
    half_height: f64,
) -> Result<Option<(f64, f64)>, ProjectionError> {
    assert!(half_height > 0.0, "height band must be positive");
    let d = x - o.origin;
    if d.norm() < DEGENERATE_RADIUS {
        return Err(ProjectionError::DegenerateDirection);
    }
    let w = spec.width() as f64;
    let h = spec.height() as f64;

    let theta = d.y.atan2(d.x);
    let mut cx = w / (2.0 * PI) * (theta + PI);
    cx = cx.rem_euclid(w);
    if cx >= w {
        cx = 0.0;
    }

    if d.z.abs() > half_height {
        return Ok(None);
    }
    let mut cy = h * (half_height - d.z) / (2.0 * half_height);
    if cy >= h {
        cy = h.next_down();
    }
    Ok(Some((cx, cy)))
}
