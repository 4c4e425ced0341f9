//! Binary netpbm: P5 graymaps (one channel) and P6 pixmaps (three channels),
//! 8-bit or 16-bit big-endian samples. Samples map to `[0, 1]` by dividing by
//! the header's maximum value.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ge::{FrameImage, GeMap};

struct Header {
    channels: usize,
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => {
            return Err(Error::BadMagic {
                path: path.to_path_buf(),
            })
        }
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for (n, field) in fields.iter_mut().enumerate() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => {
                    return Err(Error::TruncatedFile {
                        path: path.to_path_buf(),
                    })
                }
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
        *field = text.parse().map_err(|_| Error::ParseError {
            path: path.to_path_buf(),
            message: format!("bad header field {}", ["width", "height", "maxval"][n]),
        })?;
    }
    // exactly one whitespace byte before the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        None => {
            return Err(Error::TruncatedFile {
                path: path.to_path_buf(),
            })
        }
        Some(_) => {
            return Err(Error::ParseError {
                path: path.to_path_buf(),
                message: "missing whitespace after maxval".into(),
            })
        }
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(Error::ParseError {
            path: path.to_path_buf(),
            message: format!("unsupported header {width}x{height} maxval {maxval}"),
        });
    }
    Ok(Header {
        channels,
        width: width as usize,
        height: height as usize,
        maxval,
        data_offset: pos,
    })
}

pub(crate) fn decode(path: &Path, bytes: &[u8]) -> Result<FrameImage> {
    let h = parse_header(path, bytes)?;
    let samples = h.width * h.height * h.channels;
    let bytes_per = if h.maxval < 256 { 1 } else { 2 };
    let data = &bytes[h.data_offset..];
    if data.len() < samples * bytes_per {
        return Err(Error::TruncatedFile {
            path: path.to_path_buf(),
        });
    }
    let scale = h.maxval as f32;
    let values = if bytes_per == 1 {
        data[..samples].iter().map(|&b| b as f32 / scale).collect()
    } else {
        data[..samples * 2]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f32 / scale)
            .collect()
    };
    FrameImage::new(h.height, h.width, h.channels, values)
}

pub fn read_frame(path: &Path) -> Result<FrameImage> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    decode(path, &bytes)
}

fn encode(height: usize, width: usize, channels: usize, values: &[f32], maxval: u16) -> Vec<u8> {
    let magic = if channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{width} {height}\n{maxval}\n").into_bytes();
    let m = maxval as f32;
    for &v in values {
        let q = (v.clamp(0.0, 1.0) * m).round() as u16;
        if maxval < 256 {
            out.push(q as u8);
        } else {
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    out
}

/// Write a one-channel frame as P5 or a three-channel frame as P6,
/// quantizing `[0, 1]` to `0..=maxval`.
pub fn write_frame(path: &Path, frame: &FrameImage, maxval: u16) -> Result<()> {
    if !matches!(frame.channels(), 1 | 3) {
        return Err(Error::InvalidShape(format!(
            "netpbm needs 1 or 3 channels, frame has {}",
            frame.channels()
        )));
    }
    if maxval == 0 {
        return Err(Error::InvalidConfig("maxval must be positive".into()));
    }
    let bytes = encode(
        frame.height(),
        frame.width(),
        frame.channels(),
        frame.values(),
        maxval,
    );
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// 8-bit grayscale preview of a GE map, scaled so its maximum is white.
pub fn write_gemap_pgm(path: &Path, map: &GeMap) -> Result<()> {
    let max = map.max_value();
    let scaled: Vec<f32> = if max > 0.0 {
        map.values().iter().map(|v| v / max).collect()
    } else {
        vec![0.0; map.values().len()]
    };
    let bytes = encode(map.height(), map.width(), 1, &scaled, 255);
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::read_gemap;

    #[test]
    fn single_black_pixel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        fs::write(&p, b"P5\n1 1\n255\n\x00").unwrap();
        let f = read_frame(&p).unwrap();
        assert_eq!((f.height(), f.width(), f.channels()), (1, 1, 1));
        assert_eq!(f.values(), &[0.0]);
    }

    #[test]
    fn graymap_white_reads_as_one() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        fs::write(&p, b"P5\n# comment line\n2 1\n255\n\xff\x00").unwrap();
        let m = read_gemap(&p).unwrap();
        assert_eq!(m.values(), &[1.0, 0.0]);
    }

    #[test]
    fn sixteen_bit_graymap() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        fs::write(&p, b"P5 2 1 65535\n\xff\xff\x80\x00").unwrap();
        let f = read_frame(&p).unwrap();
        assert_eq!(f.values()[0], 1.0);
        assert!((f.values()[1] - 32768.0 / 65535.0).abs() < 1e-7);
    }

    #[test]
    fn pixmap_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.ppm");
        let values = vec![
            0.0, 0.1, 0.2, 0.33, 0.5, 0.66, 0.7, 0.9, 1.0, 0.123, 0.456, 0.789,
        ];
        let frame = FrameImage::new(2, 2, 3, values.clone()).unwrap();
        for maxval in [255u16, 1023] {
            write_frame(&p, &frame, maxval).unwrap();
            let back = read_frame(&p).unwrap();
            assert_eq!(back.channels(), 3);
            let bound = 1.0 / (2.0 * maxval as f32) + 1e-6;
            for (a, b) in back.values().iter().zip(&values) {
                assert!((a - b).abs() <= bound);
            }
        }
    }

    #[test]
    fn truncated_raster() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.ppm");
        fs::write(&p, b"P6\n2 2\n255\n\x00\x00\x00").unwrap();
        assert!(matches!(read_frame(&p), Err(Error::TruncatedFile { .. })));
        fs::write(&p, b"P3\n1 1\n255\n0 0 0").unwrap();
        assert!(matches!(read_frame(&p), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn preview_scales_to_white() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.pgm");
        write_gemap_pgm(&p, &GeMap::new(1, 2, vec![0.5, 2.0]).unwrap()).unwrap();
        let back = read_gemap(&p).unwrap();
        assert_eq!(back.values()[1], 1.0);
        assert!((back.values()[0] - 64.0 / 255.0).abs() < 1e-6);
    }
}
