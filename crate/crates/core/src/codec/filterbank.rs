//! Perfect-reconstruction filter bank for the two quincunx derivative
//! lattices.
//!
//! Sampling `fx` on `q1` leaves the spectrum `(Gx F + G~x F~) / 2`, where
//! `~` denotes the shift by `(H/2, W/2)`. Combining both lattices cancels
//! the aliased term and leaves `F * Gamma / 2` with
//! `Gamma = G~y Gx + G~x Gy`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use thiserror::Error;

use super::quincunx::QuincunxSampling;
use crate::delcore::NULL_EPSILON;
use crate::image::RealGrid;
use crate::spectral::{
    dft_forward, dft_inverse_real, multiplier_of, shift_half_half, KernelId, KernelSpec, SpectralError,
    SpectrumGrid,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterBankError {
    #[error(
        "kernel {kernel:?}: Gamma vanishes on {uncovered} frequencies outside the side channel at {width}x{height}"
    )]
    Infeasible {
        kernel: KernelId,
        width: usize,
        height: usize,
        uncovered: usize,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Numerically characterized zero set of `Gamma` for one kernel and size.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaAnalysis {
    pub kernel: KernelId,
    pub width: usize,
    pub height: usize,
    /// Centered frequencies with `|Gamma| < NULL_EPSILON * max|Gamma|`.
    pub zero_set: Vec<(i64, i64)>,
    /// Zero frequencies that lie on no DC or Nyquist row/column line.
    pub uncovered: Vec<(i64, i64)>,
    pub max_abs: f64,
}

impl GammaAnalysis {
    pub fn feasible(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Whether the side channel's line statistics pin down frequency `(k, l)`.
pub fn side_channel_covers(k: i64, l: i64, width: usize, height: usize) -> bool {
    let (kn, ln) = (-(height as i64) / 2, -(width as i64) / 2);
    k == 0 || k == kn || l == 0 || l == ln
}

/// `Gamma` on the full grid.
pub fn gamma(kernel: &KernelSpec, width: usize, height: usize) -> Result<SpectrumGrid, FilterBankError> {
    let (gx, gy) = multiplier_of(kernel, width, height)?;
    let (tx, ty) = shift_half_half(kernel, width, height)?;
    let values: Vec<Complex64> = (0..width * height)
        .map(|s| ty.values()[s] * gx.values()[s] + tx.values()[s] * gy.values()[s])
        .collect();
    Ok(SpectrumGrid::from_values(
        width,
        height,
        values,
        gx.normalization(),
    )?)
}

fn analyse(kernel: &KernelSpec, width: usize, height: usize) -> Result<GammaAnalysis, FilterBankError> {
    let g = gamma(kernel, width, height)?;
    let max_abs = g.max_abs();
    let cut = NULL_EPSILON * max_abs;
    let zero_set: Vec<(i64, i64)> = (0..width * height)
        .filter(|&s| max_abs == 0.0 || g.values()[s].norm() < cut)
        .map(|s| g.frequency(s))
        .collect();
    let uncovered = zero_set
        .iter()
        .copied()
        .filter(|&(k, l)| !side_channel_covers(k, l, width, height))
        .collect();
    Ok(GammaAnalysis {
        kernel: kernel.id,
        width,
        height,
        zero_set,
        uncovered,
        max_abs,
    })
}

type Cache = Mutex<HashMap<(KernelId, usize, usize), Arc<GammaAnalysis>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Zero-set analysis, computed once per kernel and size.
pub fn gamma_analysis(
    kernel: &KernelSpec,
    width: usize,
    height: usize,
) -> Result<Arc<GammaAnalysis>, FilterBankError> {
    let key = (kernel.id, width, height);
    if let Some(hit) = cache().lock().unwrap().get(&key) {
        return Ok(Arc::clone(hit));
    }
    let fresh = Arc::new(analyse(kernel, width, height)?);
    cache()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| Arc::clone(&fresh));
    Ok(fresh)
}

/// Reconstruction with the `Gamma`-zero frequencies removed.
///
/// The result differs from the source image only on
/// [`GammaAnalysis::zero_set`]; the side channel restores those.
pub fn reconstruct_quincunx(
    samp: &QuincunxSampling,
    kernel: &KernelSpec,
) -> Result<RealGrid, FilterBankError> {
    let (w, h) = (samp.width(), samp.height());
    let analysis = gamma_analysis(kernel, w, h)?;
    if !analysis.feasible() {
        return Err(FilterBankError::Infeasible {
            kernel: kernel.id,
            width: w,
            height: h,
            uncovered: analysis.uncovered.len(),
        });
    }
    let (e1, e2) = samp.embed();
    let as_complex =
        |v: Vec<f64>| -> Vec<Complex64> { v.into_iter().map(|x| Complex64::new(x, 0.0)).collect() };
    let s1 = dft_forward(w, h, &as_complex(e1))?;
    let s2 = dft_forward(w, h, &as_complex(e2))?;
    let (tx, ty) = shift_half_half(kernel, w, h)?;
    let g = gamma(kernel, w, h)?;

    let mut out = SpectrumGrid::zeros(w, h, s1.normalization());
    for slot in 0..w * h {
        let numer = s1.values()[slot] * ty.values()[slot] + s2.values()[slot] * tx.values()[slot];
        out.values_mut()[slot] = numer * 2.0 / g.values()[slot];
    }
    for &(k, l) in &analysis.zero_set {
        out.set(k, l, Complex64::new(0.0, 0.0));
    }
    Ok(dft_inverse_real(&out).grid)
}
