//! Row and column DC and Nyquist statistics that restore the frequencies
//! the filter bank cannot see.
//!
//! Values are signed fixed point with [`FRACTION_BITS`] fractional bits.
//! The Nyquist statistic of a line is `(1/len) * sum (-1)^i f(i)`.

use thiserror::Error;

use crate::image::{ImageGrid, RealGrid};

pub const FRACTION_BITS: u32 = 3;
const SCALE: f64 = (1u32 << FRACTION_BITS) as f64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SideChannelError {
    #[error("side channel is {expected_w}x{expected_h}, grid is {width}x{height}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        width: usize,
        height: usize,
    },
    #[error("side channel block holds {actual} bytes, expected {expected}")]
    Length { expected: usize, actual: usize },
    #[error("global mean disagrees with the row means")]
    InconsistentMean,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideChannel {
    pub width: usize,
    pub height: usize,
    pub row_mean: Vec<i32>,
    pub row_nyquist: Vec<i32>,
    pub col_mean: Vec<i32>,
    pub col_nyquist: Vec<i32>,
    pub global_mean: i32,
}

pub fn quantize(x: f64) -> i32 {
    (x * SCALE).round() as i32
}

pub fn dequantize(q: i32) -> f64 {
    f64::from(q) / SCALE
}

fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Exact (unquantized) line statistics of a real grid:
/// `(row means, row Nyquist, column means, column Nyquist, global mean)`.
pub fn line_statistics(grid: &RealGrid) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64) {
    let (w, h) = (grid.width, grid.height);
    let mut rm = vec![0.0; h];
    let mut rn = vec![0.0; h];
    let mut cm = vec![0.0; w];
    let mut cn = vec![0.0; w];
    for m in 0..h {
        for n in 0..w {
            let v = grid.get(m, n);
            rm[m] += v;
            rn[m] += sign(n) * v;
            cm[n] += v;
            cn[n] += sign(m) * v;
        }
    }
    let total: f64 = rm.iter().sum();
    rm.iter_mut().chain(rn.iter_mut()).for_each(|v| *v /= w as f64);
    cm.iter_mut().chain(cn.iter_mut()).for_each(|v| *v /= h as f64);
    (rm, rn, cm, cn, total / (w * h) as f64)
}

impl SideChannel {
    /// Serialized size for a `width x height` image.
    pub fn byte_len(width: usize, height: usize) -> usize {
        4 * (2 * height + 2 * width + 1)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::byte_len(self.width, self.height));
        for v in self
            .row_mean
            .iter()
            .chain(&self.row_nyquist)
            .chain(&self.col_mean)
            .chain(&self.col_nyquist)
            .chain(std::iter::once(&self.global_mean))
        {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self, SideChannelError> {
        let expected = Self::byte_len(width, height);
        if bytes.len() != expected {
            return Err(SideChannelError::Length {
                expected,
                actual: bytes.len(),
            });
        }
        let mut values = bytes
            .chunks_exact(4)
            .map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]]));
        let mut take = |n: usize| values.by_ref().take(n).collect::<Vec<i32>>();
        let row_mean = take(height);
        let row_nyquist = take(height);
        let col_mean = take(width);
        let col_nyquist = take(width);
        let global_mean = take(1)[0];
        Ok(Self {
            width,
            height,
            row_mean,
            row_nyquist,
            col_mean,
            col_nyquist,
            global_mean,
        })
    }

    /// The stored global mean must match the mean of the stored row means
    /// to within one quantization step.
    pub fn check_consistency(&self) -> Result<(), SideChannelError> {
        let sum: i64 = self.row_mean.iter().map(|&v| i64::from(v)).sum();
        let diff = (i64::from(self.global_mean) * self.height as i64 - sum).abs();
        if diff > self.height as i64 {
            return Err(SideChannelError::InconsistentMean);
        }
        Ok(())
    }
}

pub fn side_channel_extract(image: &ImageGrid) -> SideChannel {
    let (rm, rn, cm, cn, g) = line_statistics(&image.to_real());
    let q = |v: Vec<f64>| v.into_iter().map(quantize).collect();
    SideChannel {
        width: image.width(),
        height: image.height(),
        row_mean: q(rm),
        row_nyquist: q(rn),
        col_mean: q(cm),
        col_nyquist: q(cn),
        global_mean: quantize(g),
    }
}

/// Forces, in order, row means, row Nyquist values, column means and column
/// Nyquist values to the stored statistics.
pub fn side_channel_apply(recon: &mut RealGrid, sc: &SideChannel) -> Result<(), SideChannelError> {
    let (w, h) = (recon.width, recon.height);
    if (w, h) != (sc.width, sc.height) {
        return Err(SideChannelError::DimensionMismatch {
            expected_w: sc.width,
            expected_h: sc.height,
            width: w,
            height: h,
        });
    }
    for m in 0..h {
        let row = &mut recon.data[m * w..(m + 1) * w];
        let mean = row.iter().sum::<f64>() / w as f64;
        let delta = dequantize(sc.row_mean[m]) - mean;
        row.iter_mut().for_each(|v| *v += delta);
    }
    for m in 0..h {
        let row = &mut recon.data[m * w..(m + 1) * w];
        let nyq = row.iter().enumerate().map(|(n, v)| sign(n) * v).sum::<f64>() / w as f64;
        let delta = dequantize(sc.row_nyquist[m]) - nyq;
        row.iter_mut()
            .enumerate()
            .for_each(|(n, v)| *v += sign(n) * delta);
    }
    for n in 0..w {
        let mean = (0..h).map(|m| recon.data[m * w + n]).sum::<f64>() / h as f64;
        let delta = dequantize(sc.col_mean[n]) - mean;
        (0..h).for_each(|m| recon.data[m * w + n] += delta);
    }
    for n in 0..w {
        let nyq = (0..h).map(|m| sign(m) * recon.data[m * w + n]).sum::<f64>() / h as f64;
        let delta = dequantize(sc.col_nyquist[n]) - nyq;
        (0..h).for_each(|m| recon.data[m * w + n] += sign(m) * delta);
    }
    Ok(())
}
