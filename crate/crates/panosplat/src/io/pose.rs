//! Camera pose text files: 12 whitespace-separated reals, row-major [R|t].
//!
//! Kept separate from the LPM geometry so externally estimated alignments can
//! be swapped without rewriting point maps. Text input is accepted at a 1e-6
//! orthonormality tolerance and re-orthonormalized before construction, which
//! enforces the stricter in-memory invariant.

use std::fs;
use std::path::Path;

use super::IoError;
use crate::geom::{orthonormalize, Mat3, RigidTransform, Vec3};

const TEXT_ROTATION_TOL: f64 = 1e-6;

pub fn read_pose(path: &Path) -> Result<RigidTransform, IoError> {
    let text = fs::read_to_string(path)?;
    let mut values = [0.0f64; 12];
    let mut count = 0usize;
    for tok in text.split_whitespace() {
        if count == 12 {
            return Err(IoError::ParseError {
                path: path.to_path_buf(),
                reason: "more than 12 values".into(),
            });
        }
        values[count] = tok.parse::<f64>().map_err(|_| IoError::ParseError {
            path: path.to_path_buf(),
            reason: format!("bad number {tok:?}"),
        })?;
        count += 1;
    }
    if count != 12 {
        return Err(IoError::ParseError {
            path: path.to_path_buf(),
            reason: format!("expected 12 values, found {count}"),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(IoError::NonFiniteValue(path.to_path_buf()));
    }

    let rotation = Mat3::new([
        [values[0], values[1], values[2]],
        [values[4], values[5], values[6]],
        [values[8], values[9], values[10]],
    ]);
    let translation = Vec3::new(values[3], values[7], values[11]);

    let defect = rotation_defect(rotation);
    if defect > TEXT_ROTATION_TOL {
        return Err(IoError::NotARotation {
            path: path.to_path_buf(),
            defect,
        });
    }
    let rotation = orthonormalize(rotation);
    RigidTransform::new(rotation, translation).map_err(|e| IoError::ParseError {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn write_pose(path: &Path, pose: &RigidTransform) -> Result<(), IoError> {
    let r = pose.rotation().m;
    let t = pose.translation();
    let t = [t.x, t.y, t.z];
    let mut text = String::new();
    for i in 0..3 {
        // Default f64 formatting is shortest round-trip, so read-back is exact.
        text.push_str(&format!("{} {} {} {}\n", r[i][0], r[i][1], r[i][2], t[i]));
    }
    fs::write(path, text)?;
    Ok(())
}

fn rotation_defect(m: Mat3) -> f64 {
    let gram = m.transpose().mul_mat(m);
    let mut defect: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram.m[i][j] - target).abs());
        }
    }
    defect.max((m.det() - 1.0).abs())
}
