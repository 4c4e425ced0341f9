//! GEM1: `b"GEM1"`, height and width as little-endian `u32`, then
//! `height * width` little-endian `f32` values in row-major order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ge::GeMap;

use super::pnm;

pub const GEM1_MAGIC: &[u8; 4] = b"GEM1";

/// Read a GE map from a GEM1 file or an 8/16-bit binary graymap.
///
/// Graymap samples are divided by the header's maximum sample value.
pub fn read_gemap(path: &Path) -> Result<GeMap> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    if bytes.starts_with(GEM1_MAGIC) {
        decode_gem1(path, &bytes)
    } else if bytes.starts_with(b"P5") {
        let frame = pnm::decode(path, &bytes)?;
        GeMap::new(frame.height(), frame.width(), frame.values().to_vec())
    } else {
        Err(Error::BadMagic {
            path: path.to_path_buf(),
        })
    }
}

fn decode_gem1(path: &Path, bytes: &[u8]) -> Result<GeMap> {
    let truncated = || Error::TruncatedFile {
        path: path.to_path_buf(),
    };
    if bytes.len() < 12 {
        return Err(truncated());
    }
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let count = height.checked_mul(width).ok_or_else(|| Error::ParseError {
        path: path.to_path_buf(),
        message: format!("dimensions {height}x{width} overflow"),
    })?;
    let payload = &bytes[12..];
    if payload.len() < count * 4 {
        return Err(truncated());
    }
    if payload.len() > count * 4 {
        return Err(Error::ParseError {
            path: path.to_path_buf(),
            message: format!("{} trailing bytes after raster", payload.len() - count * 4),
        });
    }
    let mut values = Vec::with_capacity(count);
    for (index, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                path: path.to_path_buf(),
                index,
            });
        }
        values.push(v);
    }
    GeMap::new(height, width, values).map_err(|e| Error::ParseError {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_gemap(path: &Path, map: &GeMap) -> Result<()> {
    let mut out = Vec::with_capacity(12 + map.values().len() * 4);
    out.extend_from_slice(GEM1_MAGIC);
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    for v in map.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
