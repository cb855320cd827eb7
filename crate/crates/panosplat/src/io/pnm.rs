//! Binary PPM (P6) color images and PGM (P5) hole masks.
//!
//! Canonical layout only: each header token is followed by exactly one
//! whitespace byte, maxval is 255, and no comments are accepted. Masks use
//! 0 = observed, 255 = hole.

use std::fs;
use std::path::Path;

use super::IoError;
use crate::grid::{Grid2, Rgb};

struct Header {
    width: usize,
    height: usize,
    payload_offset: usize,
}

/// Parses `magic <ws> width <ws> height <ws> 255 <ws>` with single-byte
/// separators.
fn parse_header(bytes: &[u8], magic: &'static str, path: &Path) -> Result<Header, IoError> {
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
        pos += 1; // exactly one whitespace byte after each token
        Ok(tok)
    };

    let found = token("magic")?;
    if found != magic.as_bytes() {
        return Err(IoError::BadMagic {
            path: path.to_path_buf(),
            expected: magic,
            found: String::from_utf8_lossy(found).into_owned(),
        });
    }
    let parse_dim = |tok: &[u8], name: &str| -> Result<usize, IoError> {
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&v| v > 0)
            .ok_or_else(|| IoError::ParseError {
                path: path.to_path_buf(),
                reason: format!("bad {name}: {:?}", String::from_utf8_lossy(tok)),
            })
    };
    let width = parse_dim(token("width")?, "width")?;
    let height = parse_dim(token("height")?, "height")?;
    let maxval = token("maxval")?;
    if maxval != b"255" {
        return Err(IoError::UnsupportedFormat(format!(
            "only maxval 255 supported, found {:?}",
            String::from_utf8_lossy(maxval)
        )));
    }
    Ok(Header {
        width,
        height,
        payload_offset: pos,
    })
}

fn check_payload(bytes: &[u8], offset: usize, expected: usize, path: &Path) -> Result<(), IoError> {
    let have = bytes.len() - offset;
    if have < expected {
        return Err(IoError::TruncatedFile(path.to_path_buf()));
    }
    if have > expected {
        return Err(IoError::ParseError {
            path: path.to_path_buf(),
            reason: format!("{} trailing bytes", have - expected),
        });
    }
    Ok(())
}

pub fn read_image(path: &Path) -> Result<Grid2<Rgb>, IoError> {
    let bytes = fs::read(path)?;
    let h = parse_header(&bytes, "P6", path)?;
    check_payload(&bytes, h.payload_offset, h.width * h.height * 3, path)?;
    let data = bytes[h.payload_offset..]
        .chunks_exact(3)
        .map(|px| Rgb::from_u8(px[0], px[1], px[2]))
        .collect();
    Ok(Grid2::from_raw(h.width, h.height, data))
}

pub fn write_image(path: &Path, image: &Grid2<Rgb>) -> Result<(), IoError> {
    let mut bytes = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    bytes.reserve(image.len() * 3);
    for px in image.data() {
        bytes.extend_from_slice(&px.to_u8());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_mask(path: &Path) -> Result<Grid2<bool>, IoError> {
    let bytes = fs::read(path)?;
    let h = parse_header(&bytes, "P5", path)?;
    check_payload(&bytes, h.payload_offset, h.width * h.height, path)?;
    let mut data = Vec::with_capacity(h.width * h.height);
    for &b in &bytes[h.payload_offset..] {
        match b {
            0 => data.push(false),
            255 => data.push(true),
            other => {
                return Err(IoError::UnsupportedFormat(format!(
                    "mask pixels must be 0 or 255, found {other}"
                )))
            }
        }
    }
    Ok(Grid2::from_raw(h.width, h.height, data))
}

pub fn write_mask(path: &Path, mask: &Grid2<bool>) -> Result<(), IoError> {
    let mut bytes = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    bytes.extend(
        mask.data()
            .iter()
            .map(|&hole| if hole { 255u8 } else { 0u8 }),
    );
    fs::write(path, bytes)?;
    Ok(())
}
