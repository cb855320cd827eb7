//! LPM: single-file carrier for a view's camera-frame point map and
//! confidence map.
//!
//! Layout: magic `LPM1`, u32 LE width, u32 LE height, u32 LE reserved (0);
//! then width*height interleaved (x, y, z) f32 LE row-major; then
//! width*height confidence f32 LE row-major.

use std::fs;
use std::path::Path;

use super::IoError;
use crate::geom::Vec3;
use crate::grid::Grid2;

const MAGIC: &[u8; 4] = b"LPM1";
const HEADER_LEN: usize = 16;

pub fn read_lpm(path: &Path) -> Result<(Grid2<Vec3>, Grid2<f64>), IoError> {
    let bytes = fs::read(path)?;
    if bytes.len() < HEADER_LEN {
        return Err(IoError::TruncatedFile(path.to_path_buf()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(IoError::BadMagic {
            path: path.to_path_buf(),
            expected: "LPM1",
            found: String::from_utf8_lossy(&bytes[0..4]).into_owned(),
        });
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let width = u32_at(4) as usize;
    let height = u32_at(8) as usize;
    let reserved = u32_at(12);
    if reserved != 0 {
        return Err(IoError::UnsupportedFormat(format!(
            "LPM reserved field must be 0, found {reserved}"
        )));
    }

    let n = width
        .checked_mul(height)
        .ok_or_else(|| IoError::UnsupportedFormat("LPM dimensions overflow".into()))?;
    let expected = HEADER_LEN + n * 12 + n * 4;
    if bytes.len() < expected {
        return Err(IoError::TruncatedFile(path.to_path_buf()));
    }
    if bytes.len() > expected {
        return Err(IoError::ParseError {
            path: path.to_path_buf(),
            reason: format!("{} trailing bytes", bytes.len() - expected),
        });
    }

    let f32_at = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let off = HEADER_LEN + i * 12;
        let p = Vec3::new(
            f64::from(f32_at(off)),
            f64::from(f32_at(off + 4)),
            f64::from(f32_at(off + 8)),
        );
        if !p.is_finite() {
            return Err(IoError::NonFiniteValue(path.to_path_buf()));
        }
        points.push(p);
    }
    let conf_base = HEADER_LEN + n * 12;
    let mut confidence = Vec::with_capacity(n);
    for i in 0..n {
        let c = f64::from(f32_at(conf_base + i * 4));
        if !c.is_finite() {
            return Err(IoError::NonFiniteValue(path.to_path_buf()));
        }
        if !(0.0..=1.0).contains(&c) {
            return Err(IoError::ConfidenceOutOfRange {
                path: path.to_path_buf(),
                value: c,
            });
        }
        confidence.push(c);
    }

    Ok((
        Grid2::from_raw(width, height, points),
        Grid2::from_raw(width, height, confidence),
    ))
}

pub fn write_lpm(
    path: &Path,
    points: &Grid2<Vec3>,
    confidence: &Grid2<f64>,
) -> Result<(), IoError> {
    if !points.same_size(confidence) {
        return Err(IoError::DimensionMismatch(format!(
            "points {}x{} vs confidence {}x{}",
            points.width(),
            points.height(),
            confidence.width(),
            confidence.height()
        )));
    }
    let n = points.len();
    let mut bytes = Vec::with_capacity(HEADER_LEN + n * 16);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(points.width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(points.height() as u32).to_le_bytes());
    bytes.extend_from_slice(&0u32.to_le_bytes());
    for p in points.data() {
        bytes.extend_from_slice(&(p.x as f32).to_le_bytes());
        bytes.extend_from_slice(&(p.y as f32).to_le_bytes());
        bytes.extend_from_slice(&(p.z as f32).to_le_bytes());
    }
    for c in confidence.data() {
        bytes.extend_from_slice(&(*c as f32).to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}
