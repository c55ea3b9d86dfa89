//! Raster containers shared by every stage of the pipeline.
//!
//! Pixels are addressed as `(m, n)` with `m` the row (top to bottom) and `n`
//! the column (left to right). Derivatives labelled `x` run along `m` and
//! those labelled `y` run along `n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("pixel value {value} at index {index} exceeds {max} for {depth}-bit images")]
    PixelOutOfRange {
        index: usize,
        value: u32,
        max: u32,
        depth: u8,
    },
    #[error("unsupported bit depth {0} (expected 8 or 16)")]
    UnsupportedDepth(u8),
}

/// Sample precision of a source raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn from_bits(bits: u8) -> Result<Self, ImageError> {
        match bits {
            8 => Ok(BitDepth::Eight),
            16 => Ok(BitDepth::Sixteen),
            other => Err(ImageError::UnsupportedDepth(other)),
        }
    }

    pub fn bits(self) -> u8 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    /// Largest representable pixel value, `2^bits - 1`.
    pub fn max_value(self) -> u32 {
        (1u32 << self.bits()) - 1
    }

    /// Number of distinct pixel levels, `2^bits`.
    pub fn levels(self) -> u32 {
        1u32 << self.bits()
    }
}

/// How a finite-difference stencil treats the last row and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeMode {
    /// Only sites whose stencil lies fully inside the raster; output shrinks.
    Valid,
    /// Periodic continuation; output keeps the source shape.
    Circular,
}

/// Integer grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    depth: BitDepth,
    pixels: Vec<u16>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, depth: BitDepth, pixels: Vec<u16>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(ImageError::EmptyDimensions { width, height })?;
        if pixels.len() != expected {
            return Err(ImageError::BufferLength {
                expected,
                actual: pixels.len(),
            });
        }
        let max = depth.max_value();
        if let Some((index, &value)) = pixels.iter().enumerate().find(|(_, &p)| u32::from(p) > max) {
            return Err(ImageError::PixelOutOfRange {
                index,
                value: value.into(),
                max,
                depth: depth.bits(),
            });
        }
        Ok(Self {
            width,
            height,
            depth,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(m, n)` at every site.
    pub fn from_fn(
        width: usize,
        height: usize,
        depth: BitDepth,
        mut f: impl FnMut(usize, usize) -> u16,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width * height);
        for m in 0..height {
            for n in 0..width {
                pixels.push(f(m, n));
            }
        }
        Self::new(width, height, depth, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self) -> BitDepth {
        self.depth
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn has_even_dims(&self) -> bool {
        self.width % 2 == 0 && self.height % 2 == 0
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> u16 {
        self.pixels[m * self.width + n]
    }

    pub fn to_real(&self) -> RealGrid {
        RealGrid {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(|&p| f64::from(p)).collect(),
        }
    }

    /// 180 degree rotation.
    pub fn rotate_180(&self) -> Self {
        let mut pixels = self.pixels.clone();
        pixels.reverse();
        Self {
            pixels,
            ..self.clone()
        }
    }

    /// 90 degree clockwise rotation; swaps width and height.
    pub fn rotate_90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut pixels = vec![0u16; w * h];
        for m in 0..h {
            for n in 0..w {
                // (m, n) -> (n, h - 1 - m) in an h-wide raster
                pixels[n * h + (h - 1 - m)] = self.pixels[m * w + n];
            }
        }
        Self {
            width: h,
            height: w,
            depth: self.depth,
            pixels,
        }
    }

    pub fn transpose(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut pixels = vec![0u16; w * h];
        for m in 0..h {
            for n in 0..w {
                pixels[n * h + m] = self.pixels[m * w + n];
            }
        }
        Self {
            width: h,
            height: w,
            depth: self.depth,
            pixels,
        }
    }
}

/// Real-valued raster used for reconstructions and other intermediates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl RealGrid {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.data[m * self.width + n]
    }

    #[inline]
    pub fn get_mut(&mut self, m: usize, n: usize) -> &mut f64 {
        &mut self.data[m * self.width + n]
    }

    /// Largest absolute deviation from an integer image of the same shape.
    pub fn max_abs_diff(&self, other: &ImageGrid) -> f64 {
        self.data
            .iter()
            .zip(other.pixels())
            .map(|(&a, &b)| (a - f64::from(b)).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_pixels() {
        let err = ImageGrid::new(2, 1, BitDepth::Eight, vec![0, 256]).unwrap_err();
        assert!(matches!(err, ImageError::PixelOutOfRange { index: 1, .. }));
    }

    #[test]
    fn rejects_wrong_buffer_length() {
        assert!(matches!(
            ImageGrid::new(2, 2, BitDepth::Eight, vec![0; 3]),
            Err(ImageError::BufferLength {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn rotations_compose() {
        let img = ImageGrid::from_fn(3, 2, BitDepth::Eight, |m, n| (m * 3 + n) as u16).unwrap();
        let r2 = img.rotate_90().rotate_90();
        assert_eq!(r2, img.rotate_180());
        assert_eq!(img.rotate_90().width(), 2);
        assert_eq!(img.transpose().transpose(), img);
    }
}
