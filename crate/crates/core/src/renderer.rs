//! Fine-grid deldensity images: direct binning (nearest or bilinear) and
//! the phasor method, where the characteristic function of the gradient
//! distribution is sampled on a frequency grid and inverse transformed.
//!
//! A `K x K` image covers `[-R, R)^2` periodically; cell `a` sits at
//! `-R + a * h` with `h = 2R / K`. Rows follow `fx`, columns `fy`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delcore::{deldensity, GradientField};
use crate::image::{BitDepth, ImageError, ImageGrid};
use crate::spectral::{dft_inverse, Normalization, SpectrumGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("render size must be even and at least 2, got {0}")]
    BadSize(usize),
    #[error("gradient range must be positive and finite, got {0}")]
    BadRange(f64),
    #[error("gradient component {value} lies outside the range +-{range}")]
    OutOfRange { value: i32, range: f64 },
    #[error("gamma exponent must be positive and finite, got {0}")]
    BadGamma(f64),
    #[error("density file does not start with DDEN")]
    BadMagic,
    #[error("density file: expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("density file header has non-zero reserved bytes")]
    Reserved,
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RenderMethod {
    BinNearest,
    BinBilinear,
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ToneMap {
    Linear,
    Invert,
    Gamma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub size: usize,
    pub range: f64,
    pub method: RenderMethod,
    pub tone: ToneMap,
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.size < 2 || self.size % 2 != 0 {
            return Err(RenderError::BadSize(self.size));
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(RenderError::BadRange(self.range));
        }
        if let ToneMap::Gamma(g) = self.tone {
            if !(g > 0.0 && g.is_finite()) {
                return Err(RenderError::BadGamma(g));
            }
        }
        Ok(())
    }

    pub fn cell(&self) -> f64 {
        2.0 * self.range / self.size as f64
    }

    /// Range with a 10% margin over the largest component, snapped so that
    /// integer gradients fall exactly on cell centres.
    pub fn auto_range(grad: &GradientField, size: usize) -> f64 {
        let reach = (1.1 * f64::from(grad.max_component())).max(1.0);
        let h_min = 2.0 * reach / size as f64;
        let h = if h_min <= 1.0 {
            1.0 / (1.0 / h_min).floor()
        } else {
            h_min.ceil()
        };
        h * size as f64 / 2.0
    }

    pub fn auto(grad: &GradientField, size: usize, method: RenderMethod) -> Self {
        Self {
            size,
            range: Self::auto_range(grad, size),
            method,
            tone: ToneMap::Linear,
        }
    }
}

/// Density values per unit area on a `size x size` grid over `[-R, R)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityImage {
    pub size: usize,
    pub range: f64,
    pub values: Vec<f64>,
}

impl DensityImage {
    pub fn cell(&self) -> f64 {
        2.0 * self.range / self.size as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell() * self.cell()
    }

    /// Gradient value at the centre of cell `a`.
    pub fn coordinate(&self, a: usize) -> f64 {
        -self.range + a as f64 * self.cell()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.size + b]
    }

    /// Probability mass in each cell.
    pub fn cell_masses(&self) -> Vec<f64> {
        let area = self.cell_area();
        self.values.iter().map(|v| v * area).collect()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// Sum of absolute per-cell mass differences.
    pub fn l1_distance(&self, other: &DensityImage) -> f64 {
        self.cell_masses()
            .iter()
            .zip(other.cell_masses())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Cell with the largest value, as `(row, column)`.
    pub fn peak(&self) -> (usize, usize) {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| if v > best.1 { (i, v) } else { best },
            );
        (i / self.size, i % self.size)
    }
}

fn check_range(grad: &GradientField, cfg: &RenderConfig) -> Result<(), RenderError> {
    cfg.validate()?;
    let worst = grad.max_component();
    if f64::from(worst) > cfg.range {
        return Err(RenderError::OutOfRange {
            value: worst,
            range: cfg.range,
        });
    }
    Ok(())
}

fn wrap(i: i64, k: usize) -> usize {
    i.rem_euclid(k as i64) as usize
}

/// Direct histogram on the fine grid. Ignores `cfg.method` unless it is
/// [`RenderMethod::BinBilinear`].
pub fn render_binned(grad: &GradientField, cfg: &RenderConfig) -> Result<DensityImage, RenderError> {
    check_range(grad, cfg)?;
    let k = cfg.size;
    let h = cfg.cell();
    let dd = deldensity(grad);
    let total = dd.total() as f64;
    let mut mass = vec![0.0; k * k];
    for &((x, y), c) in dd.bins() {
        let w = c as f64 / total;
        let tx = (f64::from(x) + cfg.range) / h;
        let ty = (f64::from(y) + cfg.range) / h;
        if cfg.method == RenderMethod::BinBilinear {
            let (x0, y0) = (tx.floor(), ty.floor());
            let (fx, fy) = (tx - x0, ty - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
                for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
                    if wx * wy != 0.0 {
                        mass[wrap(x0 + dx, k) * k + wrap(y0 + dy, k)] += w * wx * wy;
                    }
                }
            }
        } else {
            mass[wrap(tx.round() as i64, k) * k + wrap(ty.round() as i64, k)] += w;
        }
    }
    let area = h * h;
    Ok(DensityImage {
        size: k,
        range: cfg.range,
        values: mass.into_iter().map(|m| m / area).collect(),
    })
}

/// Phasor sums `P(k, l) = mean exp(-2 pi i (mu_k fx + nu_l fy))` with
/// `mu_k = k / 2R`.
///
/// On the Nyquist row and column the phasor is replaced by its real part,
/// which keeps `P` exactly Hermitian on the periodic grid.
pub fn phasor_spectrum(grad: &GradientField, size: usize, range: f64) -> Result<SpectrumGrid, RenderError> {
    if size < 2 || size % 2 != 0 {
        return Err(RenderError::BadSize(size));
    }
    let dd = deldensity(grad);
    let bins = dd.bins();
    let freqs: Vec<i64> = (0..size).map(|s| crate::spectral::centered(s, size)).collect();
    let nyquist = -(size as i64) / 2;
    let phasor = |k: i64, v: i32| -> Complex64 {
        let z = Complex64::from_polar(1.0, -PI * k as f64 * f64::from(v) / range);
        if k == nyquist {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    };

    // t[row][l] = sum_j c_ij * phasor(l, j) for each distinct fx value i
    let mut rows: Vec<(i32, Vec<Complex64>)> = Vec::new();
    for &((i, j), c) in bins {
        if rows.last().map(|r| r.0) != Some(i) {
            rows.push((i, vec![Complex64::new(0.0, 0.0); size]));
        }
        let acc = &mut rows.last_mut().unwrap().1;
        let c = c as f64;
        for (slot, &l) in freqs.iter().enumerate() {
            acc[slot] += phasor(l, j) * c;
        }
    }
    let total = dd.total() as f64;
    let mut values = vec![Complex64::new(0.0, 0.0); size * size];
    for (i, t) in &rows {
        for (ks, &k) in freqs.iter().enumerate() {
            let e = phasor(k, *i);
            let out = &mut values[ks * size..(ks + 1) * size];
            for (o, &tv) in out.iter_mut().zip(t) {
                *o += e * tv;
            }
        }
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(SpectrumGrid::from_values(size, size, values, Normalization::Unscaled).expect("square even grid"))
}

/// Phasor render together with its spectrum and the largest imaginary part
/// dropped from the inverse transform.
#[derive(Debug, Clone)]
pub struct FourierRender {
    pub density: DensityImage,
    pub phasors: SpectrumGrid,
    pub max_imag: f64,
}

pub fn render_fourier_detailed(
    grad: &GradientField,
    cfg: &RenderConfig,
) -> Result<FourierRender, RenderError> {
    check_range(grad, cfg)?;
    let k = cfg.size;
    let phasors = phasor_spectrum(grad, k, cfg.range)?;
    let mut shifted = phasors.clone();
    for slot in 0..k * k {
        let (a, b) = shifted.frequency(slot);
        if (a + b) % 2 != 0 {
            shifted.values_mut()[slot] = -shifted.values()[slot];
        }
    }
    // the inverse of an unscaled grid carries 1/K^2, which is the cell mass
    let masses = dft_inverse(&shifted);
    let max_imag = masses.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let area = cfg.cell() * cfg.cell();
    Ok(FourierRender {
        density: DensityImage {
            size: k,
            range: cfg.range,
            values: masses.iter().map(|v| v.re / area).collect(),
        },
        phasors,
        max_imag,
    })
}

pub fn render_fourier(grad: &GradientField, cfg: &RenderConfig) -> Result<DensityImage, RenderError> {
    Ok(render_fourier_detailed(grad, cfg)?.density)
}

/// Dispatches on `cfg.method`.
pub fn render(grad: &GradientField, cfg: &RenderConfig) -> Result<DensityImage, RenderError> {
    match cfg.method {
        RenderMethod::BinNearest | RenderMethod::BinBilinear => render_binned(grad, cfg),
        RenderMethod::Fourier => render_fourier(grad, cfg),
    }
}

/// 16-bit export. Negative ripple is clipped here, never in the density.
pub fn tone_map_export(dimg: &DensityImage, tone: ToneMap) -> Result<ImageGrid, RenderError> {
    if let ToneMap::Gamma(g) = tone {
        if !(g > 0.0 && g.is_finite()) {
            return Err(RenderError::BadGamma(g));
        }
    }
    let top = f64::from(BitDepth::Sixteen.max_value());
    let max = dimg.values.iter().copied().fold(0.0, f64::max);
    let pixels: Vec<u16> = if max <= 0.0 {
        vec![0; dimg.values.len()]
    } else {
        dimg.values
            .iter()
            .map(|&v| {
                let t = v.max(0.0) / max;
                let out = match tone {
                    ToneMap::Linear => top * t,
                    ToneMap::Invert => top - top * t,
                    ToneMap::Gamma(g) => top * t.powf(g),
                };
                out.round().clamp(0.0, top) as u16
            })
            .collect()
    };
    Ok(ImageGrid::new(dimg.size, dimg.size, BitDepth::Sixteen, pixels)?)
}

pub const DDEN_MAGIC: [u8; 4] = *b"DDEN";
pub const DDEN_HEADER_LEN: usize = 16;

/// `"DDEN" | u32 K | f32 R | 4 zero bytes | K*K f32`, little-endian.
pub fn write_dden(dimg: &DensityImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(DDEN_HEADER_LEN + 4 * dimg.values.len());
    out.extend_from_slice(&DDEN_MAGIC);
    out.extend_from_slice(&(dimg.size as u32).to_le_bytes());
    out.extend_from_slice(&(dimg.range as f32).to_le_bytes());
    out.extend_from_slice(&[0; 4]);
    for &v in &dimg.values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn read_dden(bytes: &[u8]) -> Result<DensityImage, RenderError> {
    if bytes.len() < DDEN_HEADER_LEN {
        return Err(RenderError::Length {
            expected: DDEN_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    if bytes[..4] != DDEN_MAGIC {
        return Err(RenderError::BadMagic);
    }
    let size = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let range = f64::from(f32::from_le_bytes(bytes[8..12].try_into().unwrap()));
    if bytes[12..16] != [0; 4] {
        return Err(RenderError::Reserved);
    }
    let expected = size
        .checked_mul(size)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(DDEN_HEADER_LEN))
        .ok_or(RenderError::BadSize(size))?;
    if bytes.len() != expected {
        return Err(RenderError::Length {
            expected,
            actual: bytes.len(),
        });
    }
    let values = bytes[DDEN_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Ok(DensityImage { size, range, values })
}
