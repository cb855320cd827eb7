//! Grayscale PFM (`Pf`) for float buffers: accumulation fields and
//! distortion heatmaps.
//!
//! Always 32-bit little-endian (scale -1.0), scanlines bottom-to-top per the
//! PFM convention. Color `PF` and big-endian files are rejected.

use std::fs;
use std::path::Path;

use super::IoError;
use crate::grid::Grid2;

pub fn read_pfm(path: &Path) -> Result<Grid2<f64>, IoError> {
    let bytes = fs::read(path)?;
    let mut pos = 0usize;
    let mut token = |name: &str| -> Result<&[u8], IoError> {
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos == start || pos >= bytes.len() {
            return Err(IoError::ParseError {
                path: path.to_path_buf(),
                reason: format!("missing {name} token"),
            });
        }
        let tok = &bytes[start..pos];
        pos += 1;
        Ok(tok)
    };

    let magic = token("magic")?;
    if magic == b"PF" {
        return Err(IoError::UnsupportedFormat(
            "color PFM (PF) not supported; float buffers here are scalar (Pf)".into(),
        ));
    }
    if magic != b"Pf" {
        return Err(IoError::BadMagic {
            path: path.to_path_buf(),
            expected: "Pf",
            found: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    let parse_num = |tok: &[u8], name: &str| -> Result<f64, IoError> {
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| IoError::ParseError {
                path: path.to_path_buf(),
                reason: format!("bad {name}: {:?}", String::from_utf8_lossy(tok)),
            })
    };
    let width = parse_num(token("width")?, "width")? as usize;
    let height = parse_num(token("height")?, "height")? as usize;
    if width == 0 || height == 0 {
        return Err(IoError::ParseError {
            path: path.to_path_buf(),
            reason: "zero dimension".into(),
        });
    }
    let scale = parse_num(token("scale")?, "scale")?;
    if scale >= 0.0 {
        return Err(IoError::UnsupportedFormat(format!(
            "big-endian PFM (scale {scale}) not supported; expected negative scale"
        )));
    }

    let n = width * height;
    let have = bytes.len() - pos;
    if have < n * 4 {
        return Err(IoError::TruncatedFile(path.to_path_buf()));
    }
    if have > n * 4 {
        return Err(IoError::ParseError {
            path: path.to_path_buf(),
            reason: format!("{} trailing bytes", have - n * 4),
        });
    }

    // Scanlines are stored bottom row first.
    let mut data = vec![0.0f64; n];
    for row in 0..height {
        let dst_row = height - 1 - row;
        for col in 0..width {
            let off = pos + (row * width + col) * 4;
            let v = f64::from(f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()));
            if !v.is_finite() {
                return Err(IoError::NonFiniteValue(path.to_path_buf()));
            }
            data[dst_row * width + col] = v;
        }
    }
    Ok(Grid2::from_raw(width, height, data))
}

pub fn write_pfm(path: &Path, grid: &Grid2<f64>) -> Result<(), IoError> {
    let mut bytes = format!("Pf\n{} {}\n-1.0\n", grid.width(), grid.height()).into_bytes();
    bytes.reserve(grid.len() * 4);
    for row in (0..grid.height()).rev() {
        for col in 0..grid.width() {
            bytes.extend_from_slice(&(*grid.get(col, row) as f32).to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("pfm-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn round_trip_bitwise() {
        // Values that survive the f64 -> f32 narrowing exactly.
        let grid = Grid2::from_raw(3, 2, vec![0.0, 1.5, -2.25, 0.0625, 4096.0, -0.125]);
        let path = tmp("rt.pfm");
        write_pfm(&path, &grid).unwrap();
        let first = std::fs::read(&path).unwrap();
        let back = read_pfm(&path).unwrap();
        assert_eq!(back, grid);
        let path2 = tmp("rt2.pfm");
        write_pfm(&path2, &back).unwrap();
        assert_eq!(first, std::fs::read(&path2).unwrap());
    }

    #[test]
    fn positive_scale_rejected() {
        let path = tmp("be.pfm");
        std::fs::write(&path, b"Pf\n1 1\n1.0\n\x00\x00\x00\x00").unwrap();
        assert!(matches!(
            read_pfm(&path),
            Err(IoError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn color_pfm_rejected() {
        let path = tmp("pf.pfm");
        std::fs::write(&path, b"PF\n1 1\n-1.0\n").unwrap();
        assert!(matches!(
            read_pfm(&path),
            Err(IoError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn row_order_is_bottom_up() {
        // 1x2 grid: top value 1.0, bottom value 2.0 -> file stores 2.0 first.
        let grid = Grid2::from_raw(1, 2, vec![1.0, 2.0]);
        let path = tmp("rows.pfm");
        write_pfm(&path, &grid).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let payload = &bytes[bytes.len() - 8..];
        assert_eq!(f32::from_le_bytes(payload[0..4].try_into().unwrap()), 2.0);
        assert_eq!(f32::from_le_bytes(payload[4..8].try_into().unwrap()), 1.0);
    }
}
