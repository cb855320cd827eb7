//! 3-vectors, 3x3 matrices and rigid (SE(3)) transforms.
//!
//! Everything is f64; file formats narrow to f32 at the I/O boundary only.

use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Orthonormality defect allowed by [`RigidTransform::new`].
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("matrix is not a rotation (orthonormality defect {defect:.3e})")]
    NotARotation { defect: f64 },
    #[error("non-finite component in {0}")]
    NonFinite(&'static str),
}

/// A point or direction in scene space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix. Only what the pipeline needs; no general linear algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn new(m: [[f64; 3]; 3]) -> Self {
        Mat3 { m }
    }

    /// Rotation about the z axis by `angle` radians.
    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat3::new([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn transpose(self) -> Mat3 {
        let m = self.m;
        Mat3::new([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(self) -> f64 {
        let m = self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn mul_vec(self, v: Vec3) -> Vec3 {
        let m = self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(self, o: Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat3::new(r)
    }

    pub fn is_finite(self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest element of |self^T self - I| plus |det - 1|; zero for a rotation.
    fn rotation_defect(self) -> f64 {
        let gram = self.transpose().mul_mat(self);
        let mut defect: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram.m[i][j] - target).abs());
            }
        }
        defect.max((self.det() - 1.0).abs())
    }
}

/// Camera-to-unified-frame transform: X_world = R * X_cam + t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    /// Validates that `rotation` is orthonormal with det +1 within [`ROTATION_TOL`].
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, GeomError> {
        if !rotation.is_finite() {
            return Err(GeomError::NonFinite("rotation"));
        }
        if !translation.is_finite() {
            return Err(GeomError::NonFinite("translation"));
        }
        let defect = rotation.rotation_defect();
        if defect > ROTATION_TOL {
            return Err(GeomError::NotARotation { defect });
        }
        Ok(RigidTransform {
            rotation,
            translation,
        })
    }

    pub fn rotation(&self) -> Mat3 {
        self.rotation
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    /// R * x + t.
    pub fn transform_point(&self, x: Vec3) -> Vec3 {
        self.rotation.mul_vec(x) + self.translation
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -rt.mul_vec(self.translation),
        }
    }

    /// self after `other`: (self * other)(x) = self(other(x)).
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation.mul_mat(other.rotation),
            translation: self.rotation.mul_vec(other.translation) + self.translation,
        }
    }
}

/// Projects an approximately orthonormal matrix onto a rotation (Gram-Schmidt).
///
/// Used by the pose reader, which accepts text input at a looser tolerance
/// than [`RigidTransform::new`] enforces.
pub fn orthonormalize(m: Mat3) -> Mat3 {
    let r0 = Vec3::new(m.m[0][0], m.m[0][1], m.m[0][2]).normalized();
    let mut r1 = Vec3::new(m.m[1][0], m.m[1][1], m.m[1][2]);
    r1 = (r1 - r0 * r0.dot(r1)).normalized();
    let r2 = r0.cross(r1);
    Mat3::new([[r0.x, r0.y, r0.z], [r1.x, r1.y, r1.z], [r2.x, r2.y, r2.z]])
}
