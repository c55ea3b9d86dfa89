//! Discrete Fourier transforms on centered index grids, plus the frequency
//! multipliers of the gradient kernels.
//!
//! Forward transforms carry the full `1/(rows*cols)` factor (or `1/len` in
//! 1D) and inverse transforms are unscaled, so `F(0,0)` is the mean of the
//! input and Parseval reads `mean(|x|^2) = sum(|F|^2)`.
//!
//! Frequencies are addressed by centered indices: `k` in `[-rows/2, rows/2)`
//! pairs with the row coordinate `m`, `l` in `[-cols/2, cols/2)` with the
//! column coordinate `n`. Storage is in plain FFT order.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::RealGrid;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("grid dimensions must be even and at least 2, got {width}x{height}")]
    Dimension { width: usize, height: usize },
    #[error("buffer holds {actual} values, expected {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("spectra have mismatched shapes")]
    ShapeMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Forward sum carries `1/(rows*cols)`; produced by [`dft_forward`].
    ForwardScaled,
    /// Plain sums; used for kernel multipliers.
    Unscaled,
}

/// Complex frequency-domain grid with centered indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    width: usize,
    height: usize,
    values: Vec<Complex64>,
    normalization: Normalization,
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<(), SpectralError> {
    if width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0 {
        return Err(SpectralError::Dimension { width, height });
    }
    Ok(())
}

/// Maps a centered frequency onto its storage slot along an axis of `len`.
#[inline]
fn wrap(index: i64, len: usize) -> usize {
    index.rem_euclid(len as i64) as usize
}

/// Centered frequency of storage slot `slot` along an axis of `len`.
#[inline]
pub fn centered(slot: usize, len: usize) -> i64 {
    let half = (len / 2) as i64;
    let s = slot as i64;
    if s >= (len as i64 - half) {
        s - len as i64
    } else {
        s
    }
}

impl SpectrumGrid {
    pub fn zeros(width: usize, height: usize, normalization: Normalization) -> Self {
        Self {
            width,
            height,
            values: vec![Complex64::new(0.0, 0.0); width * height],
            normalization,
        }
    }

    pub fn from_values(
        width: usize,
        height: usize,
        values: Vec<Complex64>,
        normalization: Normalization,
    ) -> Result<Self, SpectralError> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(SpectralError::BufferLength {
                expected: width * height,
                actual: values.len(),
            });
        }
        Ok(Self {
            width,
            height,
            values,
            normalization,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Values in FFT storage order (row-major over `k` then `l`).
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn slot(&self, k: i64, l: i64) -> usize {
        wrap(k, self.height) * self.width + wrap(l, self.width)
    }

    /// Centered `(k, l)` of a storage slot.
    #[inline]
    pub fn frequency(&self, slot: usize) -> (i64, i64) {
        (
            centered(slot / self.width, self.height),
            centered(slot % self.width, self.width),
        )
    }

    /// Value at centered frequency `(k, l)`; indices wrap periodically.
    #[inline]
    pub fn get(&self, k: i64, l: i64) -> Complex64 {
        self.values[self.slot(k, l)]
    }

    #[inline]
    pub fn set(&mut self, k: i64, l: i64, value: Complex64) {
        let slot = self.slot(k, l);
        self.values[slot] = value;
    }

    /// The Nyquist corner frequency `(-rows/2, -cols/2)`.
    pub fn nyquist(&self) -> (i64, i64) {
        (-(self.height as i64 / 2), -(self.width as i64 / 2))
    }

    /// `G(k - rows/2, l - cols/2)` by circular index rolling.
    pub fn roll_half(&self) -> Self {
        let (hk, hl) = (self.height / 2, self.width / 2);
        let mut out = Self::zeros(self.width, self.height, self.normalization);
        for r in 0..self.height {
            for c in 0..self.width {
                let src = ((r + hk) % self.height) * self.width + (c + hl) % self.width;
                out.values[r * self.width + c] = self.values[src];
            }
        }
        out
    }

    /// Elementwise product; normalization follows `self`.
    pub fn hadamard(&self, other: &Self) -> Result<Self, SpectralError> {
        if self.width != other.width || self.height != other.height {
            return Err(SpectralError::ShapeMismatch);
        }
        Ok(Self {
            width: self.width,
            height: self.height,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
            normalization: self.normalization,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Largest `|X(-k,-l) - conj(X(k,l))|` relative to `max|X|`.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for slot in 0..self.values.len() {
            let (k, l) = self.frequency(slot);
            let d = (self.get(-k, -l) - self.values[slot].conj()).norm();
            worst = worst.max(d);
        }
        worst / scale
    }
}

fn fft_rows_cols(data: &mut [Complex64], width: usize, height: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft(width, direction);
    for row in data.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft(height, direction);
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for c in 0..width {
        for r in 0..height {
            column[r] = data[r * width + c];
        }
        col_fft.process(&mut column);
        for r in 0..height {
            data[r * width + c] = column[r];
        }
    }
}

/// Unscaled forward sum `sum x(m,n) exp(-2 pi i (mk/rows + nl/cols))`.
fn raw_forward(data: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    fft_rows_cols(&mut buf, width, height, FftDirection::Forward);
    buf
}

/// Forward transform of a complex grid, scaled by `1/(width*height)`.
pub fn dft_forward(width: usize, height: usize, data: &[Complex64]) -> Result<SpectrumGrid, SpectralError> {
    check_dims(width, height)?;
    if data.len() != width * height {
        return Err(SpectralError::BufferLength {
            expected: width * height,
            actual: data.len(),
        });
    }
    let scale = 1.0 / (width * height) as f64;
    let mut values = raw_forward(data, width, height);
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(SpectrumGrid {
        width,
        height,
        values,
        normalization: Normalization::ForwardScaled,
    })
}

pub fn dft_forward_real(grid: &RealGrid) -> Result<SpectrumGrid, SpectralError> {
    let data: Vec<Complex64> = grid.data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    dft_forward(grid.width, grid.height, &data)
}

/// Exact inverse of [`dft_forward`] for forward-scaled spectra; unscaled
/// spectra are divided by the sample count so the pair still inverts.
pub fn dft_inverse(spectrum: &SpectrumGrid) -> Vec<Complex64> {
    let mut buf = spectrum.values.clone();
    fft_rows_cols(&mut buf, spectrum.width, spectrum.height, FftDirection::Inverse);
    if spectrum.normalization == Normalization::Unscaled {
        let scale = 1.0 / (spectrum.width * spectrum.height) as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }
    buf
}

/// Real part of the inverse together with the largest discarded imaginary part.
#[derive(Debug, Clone)]
pub struct RealInverse {
    pub grid: RealGrid,
    pub max_imag: f64,
}

pub fn dft_inverse_real(spectrum: &SpectrumGrid) -> RealInverse {
    let values = dft_inverse(spectrum);
    let max_imag = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    RealInverse {
        grid: RealGrid {
            width: spectrum.width,
            height: spectrum.height,
            data: values.into_iter().map(|v| v.re).collect(),
        },
        max_imag,
    }
}

/// 1D spectrum with `1/len` forward scaling and centered indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum1D {
    values: Vec<Complex64>,
}

impl Spectrum1D {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, k: i64) -> Complex64 {
        self.values[wrap(k, self.values.len())]
    }

    #[inline]
    pub fn set(&mut self, k: i64, value: Complex64) {
        let n = self.values.len();
        self.values[wrap(k, n)] = value;
    }

    pub fn frequency(&self, slot: usize) -> i64 {
        centered(slot, self.values.len())
    }
}

pub fn dft_forward_1d(data: &[Complex64]) -> Spectrum1D {
    let mut values = data.to_vec();
    if !values.is_empty() {
        let fft = FftPlanner::<f64>::new().plan_fft_forward(values.len());
        fft.process(&mut values);
        let scale = 1.0 / values.len() as f64;
        values.iter_mut().for_each(|v| *v *= scale);
    }
    Spectrum1D { values }
}

pub fn dft_forward_1d_real(data: &[f64]) -> Spectrum1D {
    let c: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    dft_forward_1d(&c)
}

pub fn dft_inverse_1d(spectrum: &Spectrum1D) -> Vec<Complex64> {
    let mut values = spectrum.values.clone();
    if !values.is_empty() {
        let fft = FftPlanner::<f64>::new().plan_fft_inverse(values.len());
        fft.process(&mut values);
    }
    values
}

/// Which discrete gradient operator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelId {
    /// Compact 2x2 pair of diagonal differences.
    A,
    /// 2x2 kernel spanning both quincunx sub-lattices; the codec kernel.
    C,
    /// Exact spectral derivative with the Nyquist line zeroed.
    Fourier,
}

impl KernelId {
    /// Identifier byte used by the `.dle` container.
    pub fn code(self) -> u8 {
        match self {
            KernelId::A => 1,
            KernelId::C => 2,
            KernelId::Fourier => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(KernelId::A),
            2 => Some(KernelId::C),
            3 => Some(KernelId::Fourier),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelId::A => "a",
            KernelId::C => "c",
            KernelId::Fourier => "fourier",
        }
    }
}

/// 2x2 tap array; `taps[a][b]` weights pixel `(m + a, n + b)`.
pub type Taps = [[i32; 2]; 2];

/// A gradient kernel: its identity plus tap arrays for both components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    pub id: KernelId,
    /// `None` for the spectral kernel.
    pub taps: Option<(Taps, Taps)>,
}

impl KernelSpec {
    /// `fx = f(m, n+1) - f(m+1, n)`, `fy = f(m, n) - f(m+1, n+1)`.
    pub const A: KernelSpec = KernelSpec {
        id: KernelId::A,
        taps: Some(([[0, 1], [-1, 0]], [[1, 0], [0, -1]])),
    };

    /// `fx = [f(m+1,n+1) + f(m+1,n)] - [f(m,n+1) + f(m,n)]`,
    /// `fy = [f(m+1,n+1) - f(m+1,n)] + [f(m,n+1) - f(m,n)]`.
    pub const C: KernelSpec = KernelSpec {
        id: KernelId::C,
        taps: Some(([[-1, -1], [1, 1]], [[-1, 1], [-1, 1]])),
    };

    pub const FOURIER: KernelSpec = KernelSpec {
        id: KernelId::Fourier,
        taps: None,
    };

    pub fn of(id: KernelId) -> Self {
        match id {
            KernelId::A => Self::A,
            KernelId::C => Self::C,
            KernelId::Fourier => Self::FOURIER,
        }
    }

    /// Bound on `|fx|`, `|fy|` for integer sources of the given depth.
    pub fn value_bound(&self, max_pixel: u32) -> Option<i64> {
        self.taps.map(|(tx, ty)| {
            let pos = |t: &Taps| t.iter().flatten().filter(|&&v| v > 0).sum::<i32>();
            i64::from(pos(&tx).max(pos(&ty))) * i64::from(max_pixel)
        })
    }
}

/// Places the flipped taps so that a circular convolution with the embedded
/// array equals correlation with the taps; optionally applies `(-1)^(p+q)`.
fn embed_taps(taps: &Taps, width: usize, height: usize, checkerboard: bool) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); width * height];
    for (a, row) in taps.iter().enumerate() {
        for (b, &t) in row.iter().enumerate() {
            let p = (height - a) % height;
            let q = (width - b) % width;
            let sign = if checkerboard && (p + q) % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            buf[p * width + q] += Complex64::new(sign * f64::from(t), 0.0);
        }
    }
    buf
}

fn fourier_multipliers(width: usize, height: usize) -> (SpectrumGrid, SpectrumGrid) {
    let mut gx = SpectrumGrid::zeros(width, height, Normalization::Unscaled);
    let mut gy = SpectrumGrid::zeros(width, height, Normalization::Unscaled);
    let (nk, nl) = gx.nyquist();
    for slot in 0..width * height {
        let (k, l) = gx.frequency(slot);
        if k != nk {
            gx.values[slot] = Complex64::new(0.0, 2.0 * PI * k as f64 / height as f64);
        }
        if l != nl {
            gy.values[slot] = Complex64::new(0.0, 2.0 * PI * l as f64 / width as f64);
        }
    }
    (gx, gy)
}

fn tap_multipliers(
    taps: &(Taps, Taps),
    width: usize,
    height: usize,
    checkerboard: bool,
) -> (SpectrumGrid, SpectrumGrid) {
    let build = |t: &Taps| SpectrumGrid {
        width,
        height,
        values: raw_forward(&embed_taps(t, width, height, checkerboard), width, height),
        normalization: Normalization::Unscaled,
    };
    (build(&taps.0), build(&taps.1))
}

/// Frequency multipliers `(Gx, Gy)` with `DFT(kernel ** f) = G * DFT(f)`.
pub fn multiplier_of(
    kernel: &KernelSpec,
    width: usize,
    height: usize,
) -> Result<(SpectrumGrid, SpectrumGrid), SpectralError> {
    check_dims(width, height)?;
    Ok(match &kernel.taps {
        Some(taps) => tap_multipliers(taps, width, height, false),
        None => fourier_multipliers(width, height),
    })
}

/// Multipliers shifted by the Nyquist corner, `G(k - rows/2, l - cols/2)`.
///
/// Tap kernels take the chequerboard-modulation route; the spectral kernel
/// has no taps and is rolled directly.
pub fn shift_half_half(
    kernel: &KernelSpec,
    width: usize,
    height: usize,
) -> Result<(SpectrumGrid, SpectrumGrid), SpectralError> {
    check_dims(width, height)?;
    Ok(match &kernel.taps {
        Some(taps) => tap_multipliers(taps, width, height, true),
        None => {
            let (gx, gy) = fourier_multipliers(width, height);
            (gx.roll_half(), gy.roll_half())
        }
    })
}
