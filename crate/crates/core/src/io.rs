//! Raster file formats.
//!
//! * `F32R`: the magic `F32R`, height and width as little-endian `u32`, then
//!   `height * width` little-endian IEEE-754 `f32` samples in row-major order.
//! * `PGM8`: binary `P5` with `maxval` 255. Samples map to `v / 255`; writing
//!   quantizes with round-half-up.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LikelihoodMap};

const F32R_MAGIC: &[u8; 4] = b"F32R";
const F32R_HEADER_LEN: usize = 12;
/// Float noise tolerated (and clamped away) at either end of `[0, 1]`.
pub const RANGE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    Pgm8,
    F32r,
}

impl RasterFormat {
    /// Guesses the format from the leading magic bytes.
    pub fn sniff(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(F32R_MAGIC) {
            Some(RasterFormat::F32r)
        } else if bytes.starts_with(b"P5") {
            Some(RasterFormat::Pgm8)
        } else {
            None
        }
    }
}

impl FromStr for RasterFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pgm" | "pgm8" => Ok(RasterFormat::Pgm8),
            "f32r" => Ok(RasterFormat::F32r),
            other => Err(Error::InvalidParameter(format!(
                "unknown raster format {other:?}"
            ))),
        }
    }
}

pub fn read_raster(bytes: &[u8], format: RasterFormat) -> Result<LikelihoodMap> {
    match format {
        RasterFormat::Pgm8 => read_pgm(bytes),
        RasterFormat::F32r => read_f32r(bytes),
    }
}

/// Reads a raster whose format is identified by its magic bytes.
pub fn read_raster_auto(bytes: &[u8]) -> Result<LikelihoodMap> {
    let format = RasterFormat::sniff(bytes)
        .ok_or_else(|| Error::MalformedHeader("unrecognized magic bytes".into()))?;
    read_raster(bytes, format)
}

pub fn write_raster(map: &LikelihoodMap, format: RasterFormat) -> Vec<u8> {
    match format {
        RasterFormat::Pgm8 => write_pgm(map),
        RasterFormat::F32r => write_f32r(map),
    }
}

/// Writes a mask as a PGM with samples 0 and 255.
pub fn write_mask_pgm(mask: &BinaryMask) -> Vec<u8> {
    write_pgm(&mask.to_likelihood())
}

fn read_f32r(bytes: &[u8]) -> Result<LikelihoodMap> {
    if bytes.len() < F32R_HEADER_LEN || &bytes[..4] != F32R_MAGIC {
        return Err(Error::MalformedHeader(
            "missing F32R magic or header".into(),
        ));
    }
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if height == 0 || width == 0 {
        return Err(Error::MalformedHeader(format!(
            "dimensions must be positive, got {height}x{width}"
        )));
    }
    let expected = height
        .checked_mul(width)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    let payload = &bytes[F32R_HEADER_LEN..];
    let found = payload.len() / 4;
    if found < expected {
        return Err(Error::TruncatedPayload { expected, found });
    }
    if payload.len() != expected * 4 {
        return Err(Error::MalformedHeader(format!(
            "{} trailing bytes after payload",
            payload.len() - expected * 4
        )));
    }
    let values = payload
        .chunks_exact(4)
        .enumerate()
        .map(|(index, chunk)| {
            let value = f64::from(f32::from_le_bytes(chunk.try_into().unwrap()));
            clamp_sample(index, value)
        })
        .collect::<Result<Vec<_>>>()?;
    LikelihoodMap::new(height, width, values)
}

fn clamp_sample(index: usize, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else if (-RANGE_TOLERANCE..0.0).contains(&value) {
        Ok(0.0)
    } else if value > 1.0 && value <= 1.0 + RANGE_TOLERANCE {
        Ok(1.0)
    } else {
        Err(Error::OutOfRange { index, value })
    }
}

fn write_f32r(map: &LikelihoodMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(F32R_HEADER_LEN + 4 * map.len());
    out.extend_from_slice(F32R_MAGIC);
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    for &v in map.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PgmCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("bad PGM {what}")))
    }
}

fn read_pgm(bytes: &[u8]) -> Result<LikelihoodMap> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::MalformedHeader("missing P5 magic".into()));
    }
    let mut cursor = PgmCursor { bytes, pos: 2 };
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "dimensions must be positive, got {height}x{width}"
        )));
    }
    if maxval != 255 {
        return Err(Error::MalformedHeader(format!(
            "only maxval 255 is supported, got {maxval}"
        )));
    }
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => {
            return Err(Error::MalformedHeader(
                "expected whitespace after maxval".into(),
            ))
        }
    }
    let expected = height
        .checked_mul(width)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    let values = payload[..expected]
        .iter()
        .map(|&b| f64::from(b) / 255.0)
        .collect();
    LikelihoodMap::new(height, width, values)
}

/// Round-half-up quantization to a byte.
pub fn quantize_u8(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn write_pgm(map: &LikelihoodMap) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", map.width(), map.height());
    let mut out = Vec::with_capacity(header.len() + map.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(map.values().iter().map(|&v| quantize_u8(v)));
    out
}
