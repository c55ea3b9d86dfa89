//! Gradient fields, the 2D gradient histogram ("deldensity"), its entropy
//! and moments, and full-rate reconstruction from a gradient.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::quincunx::{quincunx_split, symbol_stream};
use crate::entropy1d::{shannon_entropy, Density1D, EntropyError, Histogram};
use crate::image::{EdgeMode, ImageGrid, RealGrid};
use crate::spectral::{
    check_dims, dft_forward, dft_forward_real, dft_inverse_real, multiplier_of, KernelId, KernelSpec,
    SpectralError, SpectrumGrid, Taps,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradientError {
    #[error("image must be at least 2x2, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("circular edge mode needs even dimensions, got {width}x{height}")]
    OddDimensions { width: usize, height: usize },
    #[error("the spectral kernel is only defined with circular edges")]
    FourierNeedsCircular,
    #[error("operation requires circular edge mode")]
    RequiresCircular,
    #[error("gradient grids have mismatched shapes")]
    ShapeMismatch,
    #[error("support radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("frequency ({0}, {1}) is lost by the kernel but carries gradient content")]
    LostFrequency(i64, i64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// Pair of same-shaped derivative grids and the operator that made them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientField {
    width: usize,
    height: usize,
    fx: Vec<i32>,
    fy: Vec<i32>,
    kernel: KernelId,
    edge: EdgeMode,
    source_width: usize,
    source_height: usize,
}

impl GradientField {
    /// Wraps precomputed derivative grids.
    pub fn from_parts(
        width: usize,
        height: usize,
        fx: Vec<i32>,
        fy: Vec<i32>,
        kernel: KernelId,
        edge: EdgeMode,
    ) -> Result<Self, GradientError> {
        if fx.len() != width * height || fy.len() != fx.len() || fx.is_empty() {
            return Err(GradientError::ShapeMismatch);
        }
        let (source_width, source_height) = match edge {
            EdgeMode::Valid => (width + 1, height + 1),
            EdgeMode::Circular => (width, height),
        };
        Ok(Self {
            width,
            height,
            fx,
            fy,
            kernel,
            edge,
            source_width,
            source_height,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn fx(&self) -> &[i32] {
        &self.fx
    }

    pub fn fy(&self) -> &[i32] {
        &self.fy
    }

    pub fn kernel(&self) -> KernelId {
        self.kernel
    }

    pub fn edge(&self) -> EdgeMode {
        self.edge
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.source_width, self.source_height)
    }

    pub fn sites(&self) -> usize {
        self.fx.len()
    }

    /// `(fx, fy)` at every site, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        self.fx.iter().copied().zip(self.fy.iter().copied())
    }

    /// `max(|fx|, |fy|)` over all sites.
    pub fn max_component(&self) -> i32 {
        self.pairs().map(|(x, y)| x.abs().max(y.abs())).max().unwrap_or(0)
    }

    /// Largest gradient magnitude `sqrt(fx^2 + fy^2)`.
    pub fn max_magnitude(&self) -> f64 {
        self.pairs()
            .map(|(x, y)| f64::from(x).hypot(f64::from(y)))
            .fold(0.0, f64::max)
    }
}

fn apply_taps(image: &ImageGrid, taps: &Taps, edge: EdgeMode) -> (usize, usize, Vec<i32>) {
    let (w, h) = (image.width(), image.height());
    let px = image.pixels();
    let (ow, oh) = match edge {
        EdgeMode::Valid => (w - 1, h - 1),
        EdgeMode::Circular => (w, h),
    };
    let mut out = Vec::with_capacity(ow * oh);
    for m in 0..oh {
        let m1 = (m + 1) % h;
        for n in 0..ow {
            let n1 = (n + 1) % w;
            let v = taps[0][0] * i32::from(px[m * w + n])
                + taps[0][1] * i32::from(px[m * w + n1])
                + taps[1][0] * i32::from(px[m1 * w + n])
                + taps[1][1] * i32::from(px[m1 * w + n1]);
            out.push(v);
        }
    }
    (ow, oh, out)
}

/// Real-valued spectral derivatives `(fx, fy)` of an even-sized image.
pub fn fourier_gradient(image: &ImageGrid) -> Result<(Vec<f64>, Vec<f64>), GradientError> {
    let (w, h) = (image.width(), image.height());
    check_dims(w, h)?;
    let spectrum = dft_forward_real(&image.to_real())?;
    let (gx, gy) = multiplier_of(&KernelSpec::FOURIER, w, h)?;
    let fx = dft_inverse_real(&spectrum.hadamard(&gx)?).grid.data;
    let fy = dft_inverse_real(&spectrum.hadamard(&gy)?).grid.data;
    Ok((fx, fy))
}

/// Applies a gradient kernel.
///
/// The spectral kernel's derivatives are rounded to the nearest integer so
/// that they can be binned like the tap kernels' outputs.
pub fn compute_gradient(
    image: &ImageGrid,
    kernel: &KernelSpec,
    edge: EdgeMode,
) -> Result<GradientField, GradientError> {
    let (w, h) = (image.width(), image.height());
    if w < 2 || h < 2 {
        return Err(GradientError::TooSmall { width: w, height: h });
    }
    if edge == EdgeMode::Circular && !image.has_even_dims() {
        return Err(GradientError::OddDimensions { width: w, height: h });
    }
    let (ow, oh, fx, fy) = match &kernel.taps {
        Some((tx, ty)) => {
            let (ow, oh, fx) = apply_taps(image, tx, edge);
            let (_, _, fy) = apply_taps(image, ty, edge);
            (ow, oh, fx, fy)
        }
        None => {
            if edge != EdgeMode::Circular {
                return Err(GradientError::FourierNeedsCircular);
            }
            let (rx, ry) = fourier_gradient(image)?;
            let round = |v: Vec<f64>| v.into_iter().map(|x| x.round() as i32).collect();
            (w, h, round(rx), round(ry))
        }
    };
    Ok(GradientField {
        width: ow,
        height: oh,
        fx,
        fy,
        kernel: kernel.id,
        edge,
        source_width: w,
        source_height: h,
    })
}

/// Joint histogram of `(fx, fy)` pairs, stored sparsely as sorted bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deldensity2D {
    bins: Vec<((i32, i32), u64)>,
    total: u64,
}

impl Deldensity2D {
    /// Histogram of arbitrary pairs. Order of the input does not matter.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i32, i32)>) -> Self {
        let mut v: Vec<(i32, i32)> = pairs.into_iter().collect();
        v.sort_unstable();
        let total = v.len() as u64;
        let mut bins: Vec<((i32, i32), u64)> = Vec::new();
        for p in v {
            match bins.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => bins.push((p, 1)),
            }
        }
        Self { bins, total }
    }

    /// Occupied bins in ascending `(i, j)` order.
    pub fn bins(&self) -> &[((i32, i32), u64)] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, i: i32, j: i32) -> u64 {
        self.bins
            .binary_search_by(|(k, _)| k.cmp(&(i, j)))
            .map(|idx| self.bins[idx].1)
            .unwrap_or(0)
    }

    pub fn weight(&self, i: i32, j: i32) -> f64 {
        self.count(i, j) as f64 / self.total as f64
    }

    /// `(i_min, i_max, j_min, j_max)` over occupied bins.
    pub fn ranges(&self) -> Option<(i32, i32, i32, i32)> {
        let first = self.bins.first()?;
        let mut r = (first.0 .0, first.0 .0, first.0 .1, first.0 .1);
        for ((i, j), _) in &self.bins {
            r.0 = r.0.min(*i);
            r.1 = r.1.max(*i);
            r.2 = r.2.min(*j);
            r.3 = r.3.max(*j);
        }
        Some(r)
    }

    /// Projection onto the first coordinate (sum over `j`).
    pub fn marginal_x(&self) -> Result<Density1D, EntropyError> {
        let pairs: Vec<(i64, u64)> = self.bins.iter().map(|((i, _), c)| (i64::from(*i), *c)).collect();
        Density1D::from_counts(&pairs)
    }

    /// Projection onto the second coordinate (sum over `i`).
    pub fn marginal_y(&self) -> Result<Density1D, EntropyError> {
        let pairs: Vec<(i64, u64)> = self.bins.iter().map(|((_, j), c)| (i64::from(*j), *c)).collect();
        Density1D::from_counts(&pairs)
    }
}

impl Histogram for Deldensity2D {
    fn total(&self) -> u64 {
        self.total
    }

    fn nonzero_counts(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        Box::new(self.bins.iter().map(|(_, c)| *c))
    }
}

pub fn deldensity(grad: &GradientField) -> Deldensity2D {
    Deldensity2D::from_pairs(grad.pairs())
}

/// `log2(pi tau^2)`: the entropy of a density spread uniformly over a disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBound {
    pub tau: f64,
    pub raw: f64,
    pub pgs: f64,
}

pub fn support_bound(tau: f64) -> Result<SupportBound, GradientError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(GradientError::NonPositiveRadius(tau));
    }
    let raw = (PI * tau * tau).log2();
    Ok(SupportBound {
        tau,
        raw,
        pgs: raw / 2.0,
    })
}

/// Every entropy figure computed for one image with one kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub kernel: KernelId,
    pub edge: EdgeMode,
    pub pgs: bool,
    pub sites: usize,
    /// Bits per pixel without any modelling (the bit depth).
    pub zeroth_order: f64,
    /// Entropy of the intensity histogram.
    pub first_order: f64,
    pub h_fx: f64,
    pub h_fy: f64,
    /// Raw joint entropy `H(fx, fy)`.
    pub joint: f64,
    /// `joint / 2` when `pgs` is set, otherwise `joint`.
    pub delentropy: f64,
    /// Entropy (bits per symbol) of the codec's quincunx pair symbols, when
    /// the image admits the codec's sampling (even dimensions).
    pub quincunx_pair_entropy: Option<f64>,
    /// The same figure expressed per pixel (one symbol per two pixels).
    pub quincunx_bpp: Option<f64>,
    /// Largest observed gradient magnitude.
    pub tau: f64,
    pub support_bound: Option<SupportBound>,
}

/// Intensity-histogram entropy of an image.
pub fn first_order_entropy(image: &ImageGrid) -> f64 {
    let mut counts = vec![0u64; image.depth().levels() as usize];
    for &p in image.pixels() {
        counts[p as usize] += 1;
    }
    let pairs: Vec<(i64, u64)> = counts.iter().enumerate().map(|(i, &c)| (i as i64, c)).collect();
    let d = Density1D::from_counts(&pairs).expect("images are non-empty");
    shannon_entropy(&d).expect("counts are consistent")
}

/// Quincunx pair-symbol entropy in bits per symbol; `None` for odd sizes.
pub fn quincunx_pair_entropy(image: &ImageGrid) -> Option<f64> {
    if !image.has_even_dims() {
        return None;
    }
    let grad = compute_gradient(image, &KernelSpec::C, EdgeMode::Circular).ok()?;
    let samp = quincunx_split(&grad).ok()?;
    let stream = symbol_stream(&samp);
    shannon_entropy(&stream.density).ok()
}

pub fn delentropy(
    image: &ImageGrid,
    kernel: &KernelSpec,
    edge: EdgeMode,
    pgs: bool,
) -> Result<EntropyReport, GradientError> {
    let grad = compute_gradient(image, kernel, edge)?;
    let dd = deldensity(&grad);
    let joint = shannon_entropy(&dd)?;
    let h_fx = shannon_entropy(&dd.marginal_x()?)?;
    let h_fy = shannon_entropy(&dd.marginal_y()?)?;
    let tau = grad.max_magnitude();
    let pair = quincunx_pair_entropy(image);
    Ok(EntropyReport {
        width: image.width(),
        height: image.height(),
        bit_depth: image.depth().bits(),
        kernel: kernel.id,
        edge,
        pgs,
        sites: grad.sites(),
        zeroth_order: f64::from(image.depth().bits()),
        first_order: first_order_entropy(image),
        h_fx,
        h_fy,
        joint,
        delentropy: if pgs { joint / 2.0 } else { joint },
        quincunx_pair_entropy: pair,
        quincunx_bpp: pair.map(|h| h / 2.0),
        tau,
        support_bound: support_bound(tau).ok(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet2D {
    pub mean_i: f64,
    pub mean_j: f64,
    pub var_ii: f64,
    pub var_jj: f64,
    pub cov_ij: f64,
}

impl MomentSet2D {
    /// Smallest eigenvalue of the covariance matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let tr = self.var_ii + self.var_jj;
        let det = self.var_ii * self.var_jj - self.cov_ij * self.cov_ij;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        tr / 2.0 - disc
    }
}

/// Integer sufficient statistics of a 2D histogram or sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMoments2D {
    pub total: u64,
    pub sum_i: i128,
    pub sum_j: i128,
    pub sum_ii: i128,
    pub sum_jj: i128,
    pub sum_ij: i128,
}

impl ExactMoments2D {
    fn accumulate(&mut self, i: i32, j: i32, c: u64) {
        let (i, j, c) = (i128::from(i), i128::from(j), i128::from(c));
        self.total += c as u64;
        self.sum_i += i * c;
        self.sum_j += j * c;
        self.sum_ii += i * i * c;
        self.sum_jj += j * j * c;
        self.sum_ij += i * j * c;
    }

    pub fn of_samples(grad: &GradientField) -> Self {
        let mut m = Self::default();
        for (i, j) in grad.pairs() {
            m.accumulate(i, j, 1);
        }
        m
    }

    pub fn to_moments(self) -> MomentSet2D {
        let t = self.total as f64;
        let tt = i128::from(self.total);
        let central = |a: i128, b: i128, ab: i128| (tt * ab - a * b) as f64 / (t * t);
        MomentSet2D {
            mean_i: self.sum_i as f64 / t,
            mean_j: self.sum_j as f64 / t,
            var_ii: central(self.sum_i, self.sum_i, self.sum_ii),
            var_jj: central(self.sum_j, self.sum_j, self.sum_jj),
            cov_ij: central(self.sum_i, self.sum_j, self.sum_ij),
        }
    }
}

impl Default for ExactMoments2D {
    fn default() -> Self {
        Self {
            total: 0,
            sum_i: 0,
            sum_j: 0,
            sum_ii: 0,
            sum_jj: 0,
            sum_ij: 0,
        }
    }
}

pub fn moments2d_exact(dd: &Deldensity2D) -> ExactMoments2D {
    let mut m = ExactMoments2D::default();
    for ((i, j), c) in dd.bins() {
        m.accumulate(*i, *j, *c);
    }
    m
}

pub fn moments2d(dd: &Deldensity2D) -> Result<MomentSet2D, GradientError> {
    if dd.total() == 0 {
        return Err(EntropyError::EmptyDensity.into());
    }
    Ok(moments2d_exact(dd).to_moments())
}

/// Deldensity second moments from the image spectrum and the kernel's
/// discrete multipliers (Parseval with `1/(rows*cols)` forward scaling).
pub fn spectral_moments2d(
    image: &ImageGrid,
    kernel: &KernelSpec,
    edge: EdgeMode,
) -> Result<MomentSet2D, GradientError> {
    if edge != EdgeMode::Circular {
        return Err(GradientError::RequiresCircular);
    }
    let (w, h) = (image.width(), image.height());
    check_dims(w, h)?;
    let f = dft_forward_real(&image.to_real())?;
    let (gx, gy) = multiplier_of(kernel, w, h)?;
    let fx = f.hadamard(&gx)?;
    let fy = f.hadamard(&gy)?;
    let mut pxx = 0.0;
    let mut pyy = 0.0;
    let mut pxy = 0.0;
    for (a, b) in fx.values().iter().zip(fy.values()) {
        pxx += a.norm_sqr();
        pyy += b.norm_sqr();
        pxy += (a * b.conj()).re;
    }
    let mx = fx.get(0, 0).re;
    let my = fy.get(0, 0).re;
    Ok(MomentSet2D {
        mean_i: mx,
        mean_j: my,
        var_ii: pxx - mx * mx,
        var_jj: pyy - my * my,
        cov_ij: pxy - mx * my,
    })
}

/// Per-shell isotropy diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellDeviation {
    /// Shell radius in cycles per sample.
    pub radius: f64,
    pub bins: usize,
    /// Max `|r - mean(r)| / mean(r)` with `r = |Gx + iGy| / rho`.
    pub magnitude: f64,
    /// Max `|psi - theta - c|` in radians, `c` a global constant offset.
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub kernel: KernelId,
    pub shells: Vec<ShellDeviation>,
    pub max_magnitude: f64,
    pub max_phase: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let t = (a + PI).rem_euclid(2.0 * PI) - PI;
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Deviation of `Gx + iGy` from an ideal rotation-covariant derivative
/// over frequency shells with radius below `fraction * Nyquist`.
pub fn isotropy_report(
    kernel: &KernelSpec,
    width: usize,
    height: usize,
    fraction: f64,
) -> Result<IsotropyReport, GradientError> {
    check_dims(width, height)?;
    if width < 16 || height < 16 {
        return Err(GradientError::TooSmall { width, height });
    }
    let (gx, gy) = multiplier_of(kernel, width, height)?;
    let tap_centre = if kernel.taps.is_some() { 0.5 } else { 0.0 };
    let scale = width.min(height) as f64;
    let limit = fraction * 0.5;

    struct Sample {
        shell: usize,
        ratio: f64,
        residual: f64,
    }
    let mut samples = Vec::new();
    for slot in 0..width * height {
        let (k, l) = gx.frequency(slot);
        let u = k as f64 / height as f64;
        let v = l as f64 / width as f64;
        let rho = u.hypot(v);
        if rho == 0.0 || rho >= limit {
            continue;
        }
        // the ideal operator is 2 pi i (u + i v); undo the half-pixel anchor
        let anchor = Complex64::from_polar(1.0, -2.0 * PI * tap_centre * (u + v));
        let g = (gx.values()[slot] + Complex64::i() * gy.values()[slot]) * anchor;
        let theta = v.atan2(u);
        samples.push(Sample {
            shell: (rho * scale).round() as usize,
            ratio: g.norm() / rho,
            residual: wrap_angle(g.arg() - theta),
        });
    }
    let (sx, sy) = samples.iter().fold((0.0, 0.0), |(a, b), s| {
        (a + s.residual.cos(), b + s.residual.sin())
    });
    let offset = sy.atan2(sx);

    let max_shell = samples.iter().map(|s| s.shell).max().unwrap_or(0);
    let mut shells = Vec::new();
    for shell in 1..=max_shell {
        let members: Vec<&Sample> = samples.iter().filter(|s| s.shell == shell).collect();
        if members.is_empty() {
            continue;
        }
        let mean = members.iter().map(|s| s.ratio).sum::<f64>() / members.len() as f64;
        let magnitude = members
            .iter()
            .map(|s| (s.ratio - mean).abs() / mean)
            .fold(0.0, f64::max);
        let phase = members
            .iter()
            .map(|s| wrap_angle(s.residual - offset).abs())
            .fold(0.0, f64::max);
        shells.push(ShellDeviation {
            radius: shell as f64 / scale,
            bins: members.len(),
            magnitude,
            phase,
        });
    }
    Ok(IsotropyReport {
        kernel: kernel.id,
        max_magnitude: shells.iter().map(|s| s.magnitude).fold(0.0, f64::max),
        max_phase: shells.iter().map(|s| s.phase).fold(0.0, f64::max),
        shells,
    })
}

/// Relative threshold below which a multiplier is treated as zero.
pub const NULL_EPSILON: f64 = 1e-9;

fn complex_multiplier(
    kernel: &KernelSpec,
    width: usize,
    height: usize,
) -> Result<SpectrumGrid, GradientError> {
    let (gx, gy) = multiplier_of(kernel, width, height)?;
    let values: Vec<Complex64> = gx
        .values()
        .iter()
        .zip(gy.values())
        .map(|(a, b)| a + Complex64::i() * b)
        .collect();
    Ok(SpectrumGrid::from_values(
        width,
        height,
        values,
        gx.normalization(),
    )?)
}

/// Frequencies where `|Gx + iGy| < NULL_EPSILON * max|Gx + iGy|`.
pub fn null_frequencies(
    kernel: &KernelSpec,
    width: usize,
    height: usize,
) -> Result<Vec<(i64, i64)>, GradientError> {
    let g = complex_multiplier(kernel, width, height)?;
    let cut = NULL_EPSILON * g.max_abs();
    Ok((0..width * height)
        .filter(|&s| g.values()[s].norm() < cut)
        .map(|s| g.frequency(s))
        .collect())
}

/// Result of [`invert_gradient_fullrate`].
#[derive(Debug, Clone)]
pub struct FullRateInversion {
    pub image: RealGrid,
    /// Null frequencies left at zero (no value supplied, no content).
    pub unrecovered: Vec<(i64, i64)>,
}

/// Recovers an image from its full-rate circular gradient by dividing
/// `Fx + iFy` by `Gx + iGy`.
///
/// `dc` is the image mean. `supplied` gives forward-scaled spectral values
/// for any other null frequencies of the kernel.
pub fn invert_gradient_fullrate(
    grad: &GradientField,
    dc: f64,
    supplied: &[((i64, i64), Complex64)],
) -> Result<FullRateInversion, GradientError> {
    if grad.edge() != EdgeMode::Circular {
        return Err(GradientError::RequiresCircular);
    }
    let (w, h) = (grad.width(), grad.height());
    let kernel = KernelSpec::of(grad.kernel());
    let g = complex_multiplier(&kernel, w, h)?;
    let data: Vec<Complex64> = grad
        .pairs()
        .map(|(x, y)| Complex64::new(f64::from(x), f64::from(y)))
        .collect();
    let numer = dft_forward(w, h, &data)?;
    let g_cut = NULL_EPSILON * g.max_abs();
    let content_cut = NULL_EPSILON * numer.max_abs().max(1.0);

    let mut out = SpectrumGrid::zeros(w, h, numer.normalization());
    let mut unrecovered = Vec::new();
    for slot in 0..w * h {
        let (k, l) = numer.frequency(slot);
        let gv = g.values()[slot];
        let value = if (k, l) == (0, 0) {
            Complex64::new(dc, 0.0)
        } else if gv.norm() >= g_cut {
            numer.values()[slot] / gv
        } else if let Some((_, v)) = supplied.iter().find(|(f, _)| *f == (k, l)) {
            *v
        } else if numer.values()[slot].norm() > content_cut {
            return Err(GradientError::LostFrequency(k, l));
        } else {
            unrecovered.push((k, l));
            Complex64::new(0.0, 0.0)
        };
        out.values_mut()[slot] = value;
    }
    Ok(FullRateInversion {
        image: dft_inverse_real(&out).grid,
        unrecovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::BitDepth;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn img(w: usize, h: usize, f: impl FnMut(usize, usize) -> u16) -> ImageGrid {
        ImageGrid::from_fn(w, h, BitDepth::Eight, f).unwrap()
    }

    fn noise(seed: u64, w: usize, h: usize, levels: u16) -> ImageGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        img(w, h, |_, _| rng.gen_range(0..levels))
    }

    #[test]
    fn wedge_kernel_a_valid_is_constant() {
        let g = compute_gradient(&img(8, 6, |_, n| n as u16), &KernelSpec::A, EdgeMode::Valid).unwrap();
        assert_eq!((g.width(), g.height()), (7, 5));
        assert!(g.fx().iter().all(|&v| v == 1));
        assert!(g.fy().iter().all(|&v| v == -1));
        let dd = deldensity(&g);
        assert_eq!(dd.bins(), &[((1, -1), 35)]);
    }

    #[test]
    fn constant_image_has_zero_gradient_for_every_kernel() {
        let c = img(8, 8, |_, _| 77);
        for k in [KernelSpec::A, KernelSpec::C, KernelSpec::FOURIER] {
            let g = compute_gradient(&c, &k, EdgeMode::Circular).unwrap();
            assert!(g.pairs().all(|p| p == (0, 0)), "{:?}", k.id);
        }
    }

    #[test]
    fn checkerboard_is_in_kernel_c_null_space() {
        let cb = img(8, 8, |m, n| if (m + n) % 2 == 0 { 0 } else { 200 });
        let g = compute_gradient(&cb, &KernelSpec::C, EdgeMode::Circular).unwrap();
        assert!(g.pairs().all(|p| p == (0, 0)));
    }

    #[test]
    fn two_by_two_hand_evaluation() {
        let i = ImageGrid::new(2, 2, BitDepth::Eight, vec![0, 1, 2, 3]).unwrap();
        let g = compute_gradient(&i, &KernelSpec::A, EdgeMode::Valid).unwrap();
        assert_eq!(g.fx(), &[-1]);
        assert_eq!(g.fy(), &[-3]);
        assert_eq!(deldensity(&g).bins(), &[((-1, -3), 1)]);
    }

    #[test]
    fn gradient_errors() {
        let tiny = img(1, 4, |_, _| 0);
        assert!(matches!(
            compute_gradient(&tiny, &KernelSpec::A, EdgeMode::Valid),
            Err(GradientError::TooSmall { .. })
        ));
        let odd = img(5, 4, |_, _| 0);
        assert!(matches!(
            compute_gradient(&odd, &KernelSpec::C, EdgeMode::Circular),
            Err(GradientError::OddDimensions { .. })
        ));
        assert!(compute_gradient(&odd, &KernelSpec::C, EdgeMode::Valid).is_ok());
        assert_eq!(
            compute_gradient(&img(4, 4, |_, _| 0), &KernelSpec::FOURIER, EdgeMode::Valid),
            Err(GradientError::FourierNeedsCircular)
        );
    }

    #[test]
    fn gradient_components_within_kernel_bound() {
        let n = noise(5, 16, 16, 256);
        for k in [KernelSpec::A, KernelSpec::C] {
            let g = compute_gradient(&n, &k, EdgeMode::Circular).unwrap();
            assert!(i64::from(g.max_component()) <= k.value_bound(255).unwrap());
        }
    }

    #[test]
    fn wedge_report_is_exact() {
        let w = img(256, 256, |_, n| n as u16);
        let r = delentropy(&w, &KernelSpec::A, EdgeMode::Valid, true).unwrap();
        assert_eq!(r.first_order, 8.0);
        assert_eq!(r.delentropy, 0.0);
        assert_eq!(r.joint, 0.0);
        assert_eq!(r.zeroth_order, 8.0);
    }

    #[test]
    fn constant_report_is_zero() {
        let r = delentropy(&img(16, 16, |_, _| 9), &KernelSpec::A, EdgeMode::Valid, true).unwrap();
        assert_eq!((r.first_order, r.delentropy), (0.0, 0.0));
        assert_eq!(r.quincunx_pair_entropy, Some(0.0));
        assert!(r.support_bound.is_none());
    }

    #[test]
    fn marginals_match_component_histograms() {
        let g = compute_gradient(&noise(8, 32, 32, 256), &KernelSpec::C, EdgeMode::Circular).unwrap();
        let dd = deldensity(&g);
        let fx: Vec<i64> = g.fx().iter().map(|&v| v.into()).collect();
        let fy: Vec<i64> = g.fy().iter().map(|&v| v.into()).collect();
        assert_eq!(dd.marginal_x().unwrap(), Density1D::from_samples(&fx).unwrap());
        assert_eq!(dd.marginal_y().unwrap(), Density1D::from_samples(&fy).unwrap());
    }

    #[test]
    fn moment_examples() {
        let single = Deldensity2D::from_pairs(vec![(1, -1); 4]);
        let m = moments2d(&single).unwrap();
        assert_eq!(
            (m.mean_i, m.mean_j, m.var_ii, m.var_jj, m.cov_ij),
            (1.0, -1.0, 0.0, 0.0, 0.0)
        );
        let two = Deldensity2D::from_pairs(vec![(1, 0), (-1, 0)]);
        let m = moments2d(&two).unwrap();
        assert_eq!((m.mean_i, m.var_ii, m.var_jj, m.cov_ij), (0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn sifting_identity_on_random_image() {
        let g = compute_gradient(&noise(9, 16, 16, 256), &KernelSpec::A, EdgeMode::Valid).unwrap();
        let dd = deldensity(&g);
        assert_eq!(moments2d_exact(&dd), ExactMoments2D::of_samples(&g));
        assert!(moments2d(&dd).unwrap().min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn spectral_moments_match_histogram_moments() {
        for (seed, kernel) in [(10, KernelSpec::A), (11, KernelSpec::C)] {
            let im = noise(seed, 32, 32, 256);
            let g = compute_gradient(&im, &kernel, EdgeMode::Circular).unwrap();
            let spatial = moments2d(&deldensity(&g)).unwrap();
            let spectral = spectral_moments2d(&im, &kernel, EdgeMode::Circular).unwrap();
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-30);
            assert!(rel(spatial.var_ii, spectral.var_ii) < 1e-9);
            assert!(rel(spatial.var_jj, spectral.var_jj) < 1e-9);
            assert!((spatial.cov_ij - spectral.cov_ij).abs() < 1e-9 * spatial.var_ii);
            assert!(spectral.mean_i.abs() < 1e-9 && spectral.mean_j.abs() < 1e-9);
        }
        let c = img(8, 8, |_, _| 40);
        let m = spectral_moments2d(&c, &KernelSpec::C, EdgeMode::Circular).unwrap();
        assert!(m.var_ii.abs() < 1e-20 && m.var_jj.abs() < 1e-20 && m.cov_ij.abs() < 1e-20);
        assert_eq!(
            spectral_moments2d(&c, &KernelSpec::C, EdgeMode::Valid),
            Err(GradientError::RequiresCircular)
        );
    }

    #[test]
    fn nyquist_stripes_moments() {
        // stripes varying only along m: kernel C gives fy = 0 everywhere
        let s = img(8, 8, |m, _| if m % 2 == 0 { 10 } else { 90 });
        let spec = spectral_moments2d(&s, &KernelSpec::C, EdgeMode::Circular).unwrap();
        let g = compute_gradient(&s, &KernelSpec::C, EdgeMode::Circular).unwrap();
        let spatial = moments2d(&deldensity(&g)).unwrap();
        assert!(spec.var_jj.abs() < 1e-9);
        assert!((spec.var_ii - spatial.var_ii).abs() < 1e-9 * spatial.var_ii);
        assert_eq!(spatial.var_ii, 160.0 * 160.0);
    }

    #[test]
    fn support_bound_values() {
        let b = support_bound(510.0).unwrap();
        assert!((b.raw - 19.65).abs() < 0.01 && (b.pgs - 9.83).abs() < 0.01);
        assert!(support_bound(1.0 / PI.sqrt()).unwrap().raw.abs() < 1e-12);
        let direct = (PI * 255.0 * 255.0).log2();
        assert!((support_bound(255.0).unwrap().raw - direct).abs() < 1e-12);
        assert!((direct - 17.64).abs() < 0.01);
        assert!(support_bound(0.0).is_err() && support_bound(-1.0).is_err());
    }

    #[test]
    fn isotropy_of_kernels() {
        let f = isotropy_report(&KernelSpec::FOURIER, 32, 32, 0.5).unwrap();
        assert!(f.max_magnitude < 1e-12 && f.max_phase < 1e-12, "{f:?}");
        let a = isotropy_report(&KernelSpec::A, 32, 32, 0.5).unwrap();
        assert!(a.max_magnitude > 0.0 && a.max_magnitude.is_finite());
        let c_far = isotropy_report(&KernelSpec::C, 32, 32, 1.0).unwrap();
        assert!(c_far.max_magnitude.is_finite());
        assert!(isotropy_report(&KernelSpec::A, 8, 8, 0.5).is_err());
    }

    #[test]
    fn fullrate_inversion_recovers_images() {
        let zero = GradientField::from_parts(4, 4, vec![0; 16], vec![0; 16], KernelId::C, EdgeMode::Circular)
            .unwrap();
        let r = invert_gradient_fullrate(&zero, 12.0, &[]).unwrap();
        assert!(r.image.data.iter().all(|&v| (v - 12.0).abs() < 1e-12));

        let im = noise(12, 16, 16, 256);
        let g = compute_gradient(&im, &KernelSpec::C, EdgeMode::Circular).unwrap();
        let nulls = null_frequencies(&KernelSpec::C, 16, 16).unwrap();
        assert_eq!(nulls, vec![(0, 0), (-8, -8)]);
        let f = dft_forward_real(&im.to_real()).unwrap();
        let supplied: Vec<_> = nulls.iter().map(|&(k, l)| ((k, l), f.get(k, l))).collect();
        let mean = f.get(0, 0).re;
        let r = invert_gradient_fullrate(&g, mean, &supplied).unwrap();
        assert!(r.image.max_abs_diff(&im) < 1e-6);
        assert!(r.unrecovered.is_empty());

        let wedge = img(16, 16, |_, n| (n * 10) as u16);
        let g = compute_gradient(&wedge, &KernelSpec::A, EdgeMode::Circular).unwrap();
        let f = dft_forward_real(&wedge.to_real()).unwrap();
        let nulls = null_frequencies(&KernelSpec::A, 16, 16).unwrap();
        let supplied: Vec<_> = nulls.iter().map(|&(k, l)| ((k, l), f.get(k, l))).collect();
        let r = invert_gradient_fullrate(&g, f.get(0, 0).re, &supplied).unwrap();
        assert!(r.image.max_abs_diff(&wedge) < 1e-6);
    }

    #[test]
    fn fullrate_inversion_rejects_non_gradient_content() {
        // a constant fx field has DC content no gradient can carry
        let g = GradientField::from_parts(4, 4, vec![1; 16], vec![0; 16], KernelId::C, EdgeMode::Circular)
            .unwrap();
        // DC is always replaced, so put content at the Nyquist corner instead
        let alt: Vec<i32> = (0..16)
            .map(|s| if (s / 4 + s % 4) % 2 == 0 { 1 } else { -1 })
            .collect();
        let bad = GradientField::from_parts(4, 4, alt, vec![0; 16], KernelId::C, EdgeMode::Circular).unwrap();
        assert!(invert_gradient_fullrate(&g, 0.0, &[]).is_ok());
        assert_eq!(
            invert_gradient_fullrate(&bad, 0.0, &[]).unwrap_err(),
            GradientError::LostFrequency(-2, -2)
        );
    }

    #[test]
    fn rotation_symmetry_of_joint_entropy() {
        let im = noise(13, 32, 32, 256);
        let h = |i: &ImageGrid, e| {
            shannon_entropy(&deldensity(&compute_gradient(i, &KernelSpec::C, e).unwrap())).unwrap()
        };
        let base = h(&im, EdgeMode::Circular);
        assert!((base - h(&im.rotate_180(), EdgeMode::Circular)).abs() < 1e-12);
        assert!((base - h(&im.rotate_90(), EdgeMode::Circular)).abs() < 1e-12);

        // 180 degrees maps bins (i, j) -> (-i, -j)
        let g = compute_gradient(&im, &KernelSpec::C, EdgeMode::Circular).unwrap();
        let gr = compute_gradient(&im.rotate_180(), &KernelSpec::C, EdgeMode::Circular).unwrap();
        let flipped = Deldensity2D::from_pairs(g.pairs().map(|(i, j)| (-i, -j)));
        assert_eq!(flipped, deldensity(&gr));
    }
}
