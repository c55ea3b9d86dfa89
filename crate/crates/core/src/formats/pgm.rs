//! Binary PGM (P5), 8- and 16-bit, with `#` comments in the header.

use thiserror::Error;

use crate::image::{BitDepth, ImageError, ImageGrid};

/// Header tokens longer than this are rejected.
pub const MAX_TOKEN_LEN: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PgmError {
    #[error("not a binary PGM (expected P5)")]
    BadMagic,
    #[error("header ended before the {0} field")]
    TruncatedHeader(&'static str),
    #[error("invalid {field} token {token:?}")]
    InvalidToken { field: &'static str, token: String },
    #[error("{0} token exceeds {MAX_TOKEN_LEN} characters")]
    OversizedToken(&'static str),
    #[error("maxval {0} outside 1..=65535")]
    BadMaxval(u32),
    #[error("image dimensions {width}x{height} are not supported")]
    BadDimensions { width: u32, height: u32 },
    #[error("raster holds {actual} bytes, expected {expected}")]
    TruncatedRaster { expected: usize, actual: usize },
    #[error("sample {value} at index {index} exceeds maxval {maxval}")]
    SampleExceedsMaxval { index: usize, value: u16, maxval: u32 },
    #[error(transparent)]
    Image(#[from] ImageError),
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &'static str) -> Result<u32, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
            if self.pos - start > MAX_TOKEN_LEN {
                return Err(PgmError::OversizedToken(field));
            }
        }
        if start == self.pos {
            return Err(PgmError::TruncatedHeader(field));
        }
        let token = &self.bytes[start..self.pos];
        let invalid = || PgmError::InvalidToken {
            field,
            token: String::from_utf8_lossy(token).into_owned(),
        };
        if !token.iter().all(u8::is_ascii_digit) {
            return Err(invalid());
        }
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(invalid)
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<ImageGrid, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(PgmError::BadMagic);
    }
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur
        .bytes
        .get(cur.pos)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PgmError::BadMagic);
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(PgmError::BadMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(PgmError::TruncatedHeader("raster")),
    }
    let pixels_n = (width as usize)
        .checked_mul(height as usize)
        .filter(|&n| n > 0)
        .ok_or(PgmError::BadDimensions { width, height })?;
    let wide = maxval > 255;
    let per = if wide { 2 } else { 1 };
    let expected = pixels_n
        .checked_mul(per)
        .ok_or(PgmError::BadDimensions { width, height })?;
    let raster = &bytes[cur.pos..];
    if raster.len() < expected {
        return Err(PgmError::TruncatedRaster {
            expected,
            actual: raster.len(),
        });
    }
    let pixels: Vec<u16> = if wide {
        raster[..expected]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        raster[..expected].iter().map(|&b| u16::from(b)).collect()
    };
    if let Some((index, &value)) = pixels.iter().enumerate().find(|(_, &v)| u32::from(v) > maxval) {
        return Err(PgmError::SampleExceedsMaxval { index, value, maxval });
    }
    let depth = if wide { BitDepth::Sixteen } else { BitDepth::Eight };
    Ok(ImageGrid::new(width as usize, height as usize, depth, pixels)?)
}

/// Writes maxval 255 for 8-bit images and 65535 for 16-bit images.
pub fn write_pgm(image: &ImageGrid) -> Vec<u8> {
    let header = format!(
        "P5\n{} {}\n{}\n",
        image.width(),
        image.height(),
        image.depth().max_value()
    );
    let mut out = header.into_bytes();
    match image.depth() {
        BitDepth::Eight => out.extend(image.pixels().iter().map(|&p| p as u8)),
        BitDepth::Sixteen => {
            for &p in image.pixels() {
                out.extend_from_slice(&p.to_be_bytes());
            }
        }
    }
    out
}
