//! Half-rate sampling of the two derivative planes on complementary
//! checkerboard lattices, and the pair symbols built from them.
//!
//! `q1` holds the sites with `m + n` even and carries `fx`; `q2` holds the
//! odd sites and carries `fy`. Both are enumerated row-major.

use thiserror::Error;

use crate::delcore::{Deldensity2D, GradientField};
use crate::image::EdgeMode;
use crate::spectral::KernelId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuincunxError {
    #[error("quincunx sampling needs even dimensions, got {width}x{height}")]
    OddDimensions { width: usize, height: usize },
    #[error("kernel {0:?} cannot be used for quincunx coding")]
    WrongKernel(KernelId),
    #[error("quincunx sampling needs a circular-mode gradient")]
    NotCircular,
    #[error("expected {expected} samples, got {actual}")]
    SampleCount { expected: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuincunxSampling {
    width: usize,
    height: usize,
    s1: Vec<i32>,
    s2: Vec<i32>,
}

/// Column of the `p`-th `q1` site in row `m`.
#[inline]
pub fn q1_column(m: usize, p: usize) -> usize {
    2 * p + (m & 1)
}

/// Column of the `p`-th `q2` site in row `m`.
#[inline]
pub fn q2_column(m: usize, p: usize) -> usize {
    2 * p + 1 - (m & 1)
}

impl QuincunxSampling {
    pub fn from_parts(
        width: usize,
        height: usize,
        s1: Vec<i32>,
        s2: Vec<i32>,
    ) -> Result<Self, QuincunxError> {
        if width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0 {
            return Err(QuincunxError::OddDimensions { width, height });
        }
        let expected = width * height / 2;
        for s in [&s1, &s2] {
            if s.len() != expected {
                return Err(QuincunxError::SampleCount {
                    expected,
                    actual: s.len(),
                });
            }
        }
        Ok(Self {
            width,
            height,
            s1,
            s2,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn s1(&self) -> &[i32] {
        &self.s1
    }

    pub fn s2(&self) -> &[i32] {
        &self.s2
    }

    /// Sites per lattice, `width * height / 2`.
    pub fn sites(&self) -> usize {
        self.s1.len()
    }

    /// `(fx * q1, fy * q2)` on the full grid, zeros off-lattice.
    pub fn embed(&self) -> (Vec<f64>, Vec<f64>) {
        let (w, h) = (self.width, self.height);
        let half = w / 2;
        let mut e1 = vec![0.0; w * h];
        let mut e2 = vec![0.0; w * h];
        for m in 0..h {
            for p in 0..half {
                e1[m * w + q1_column(m, p)] = f64::from(self.s1[m * half + p]);
                e2[m * w + q2_column(m, p)] = f64::from(self.s2[m * half + p]);
            }
        }
        (e1, e2)
    }
}

/// Samples a kernel-C circular gradient on the two quincunx lattices.
pub fn quincunx_split(grad: &GradientField) -> Result<QuincunxSampling, QuincunxError> {
    if grad.kernel() != KernelId::C {
        return Err(QuincunxError::WrongKernel(grad.kernel()));
    }
    if grad.edge() != EdgeMode::Circular {
        return Err(QuincunxError::NotCircular);
    }
    let (w, h) = (grad.width(), grad.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(QuincunxError::OddDimensions { width: w, height: h });
    }
    let half = w / 2;
    let mut s1 = Vec::with_capacity(w * h / 2);
    let mut s2 = Vec::with_capacity(w * h / 2);
    for m in 0..h {
        for p in 0..half {
            s1.push(grad.fx()[m * w + q1_column(m, p)]);
        }
        for p in 0..half {
            s2.push(grad.fy()[m * w + q2_column(m, p)]);
        }
    }
    QuincunxSampling::from_parts(w, h, s1, s2)
}

/// Pair symbols in `q1` enumeration order and their histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolStream {
    pub symbols: Vec<(i32, i32)>,
    pub density: Deldensity2D,
}

/// Index into `s2` of the `q2` site immediately right of `q1` site `p` in
/// row `m`, wrapping at the row end.
#[inline]
fn partner(m: usize, p: usize, half: usize) -> usize {
    if m & 1 == 0 {
        p
    } else {
        (p + 1) % half
    }
}

/// Pairs each `q1` value with the `q2` value to its right.
pub fn symbol_stream(samp: &QuincunxSampling) -> SymbolStream {
    let half = samp.width / 2;
    let mut symbols = Vec::with_capacity(samp.sites());
    for m in 0..samp.height {
        let row = m * half;
        for p in 0..half {
            symbols.push((samp.s1[row + p], samp.s2[row + partner(m, p, half)]));
        }
    }
    let density = Deldensity2D::from_pairs(symbols.iter().copied());
    SymbolStream { symbols, density }
}

/// Inverse of [`symbol_stream`].
pub fn sampling_from_symbols(
    width: usize,
    height: usize,
    symbols: &[(i32, i32)],
) -> Result<QuincunxSampling, QuincunxError> {
    if width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0 {
        return Err(QuincunxError::OddDimensions { width, height });
    }
    let half = width / 2;
    let expected = width * height / 2;
    if symbols.len() != expected {
        return Err(QuincunxError::SampleCount {
            expected,
            actual: symbols.len(),
        });
    }
    let mut s1 = vec![0; expected];
    let mut s2 = vec![0; expected];
    for m in 0..height {
        let row = m * half;
        for p in 0..half {
            let (a, b) = symbols[row + p];
            s1[row + p] = a;
            s2[row + partner(m, p, half)] = b;
        }
    }
    QuincunxSampling::from_parts(width, height, s1, s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delcore::compute_gradient;
    use crate::image::{BitDepth, ImageGrid};
    use crate::spectral::KernelSpec;

    fn grad_c(img: &ImageGrid) -> GradientField {
        compute_gradient(img, &KernelSpec::C, EdgeMode::Circular).unwrap()
    }

    #[test]
    fn two_by_two_site_assignment() {
        let img = ImageGrid::new(2, 2, BitDepth::Eight, vec![3, 8, 1, 6]).unwrap();
        let g = grad_c(&img);
        let q = quincunx_split(&g).unwrap();
        assert_eq!(q.s1(), &[g.fx()[0], g.fx()[3]]);
        assert_eq!(q.s2(), &[g.fy()[1], g.fy()[2]]);
        assert_eq!(symbol_stream(&q).symbols.len(), 2);
    }

    #[test]
    fn constant_gives_zero_samples() {
        let img = ImageGrid::from_fn(6, 4, BitDepth::Eight, |_, _| 42).unwrap();
        let q = quincunx_split(&grad_c(&img)).unwrap();
        assert!(q.s1().iter().chain(q.s2()).all(|&v| v == 0));
        let s = symbol_stream(&q);
        assert_eq!(s.density.bins(), &[((0, 0), 12)]);
    }

    #[test]
    fn wedge_samples() {
        let w = 8;
        let img = ImageGrid::from_fn(w, 8, BitDepth::Eight, |_, n| n as u16).unwrap();
        let q = quincunx_split(&grad_c(&img)).unwrap();
        assert!(q.s1().iter().all(|&v| v == 0));
        let half = w / 2;
        for m in 0..8 {
            for p in 0..half {
                let n = q2_column(m, p);
                let v = q.s2()[m * half + p];
                let expected = if n == w - 1 { -2 * (w as i32 - 1) } else { 2 };
                assert_eq!(v, expected, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn rejects_wrong_kernel_and_mode() {
        let img = ImageGrid::from_fn(4, 4, BitDepth::Eight, |m, n| (m * n) as u16).unwrap();
        let a = compute_gradient(&img, &KernelSpec::A, EdgeMode::Circular).unwrap();
        assert_eq!(quincunx_split(&a), Err(QuincunxError::WrongKernel(KernelId::A)));
        let v = compute_gradient(&img, &KernelSpec::C, EdgeMode::Valid).unwrap();
        assert_eq!(quincunx_split(&v), Err(QuincunxError::NotCircular));
    }

    #[test]
    fn embedding_matches_lattice_masks() {
        let img = ImageGrid::from_fn(6, 4, BitDepth::Eight, |m, n| ((m * 7 + n * 13) % 31) as u16).unwrap();
        let g = grad_c(&img);
        let (e1, e2) = quincunx_split(&g).unwrap().embed();
        for m in 0..4 {
            for n in 0..6 {
                let i = m * 6 + n;
                let even = (m + n) % 2 == 0;
                assert_eq!(e1[i], if even { f64::from(g.fx()[i]) } else { 0.0 });
                assert_eq!(e2[i], if even { 0.0 } else { f64::from(g.fy()[i]) });
            }
        }
    }

    #[test]
    fn pair_symbols_are_a_bijection() {
        let img =
            ImageGrid::from_fn(8, 6, BitDepth::Eight, |m, n| ((m * 37 + n * n * 11) % 251) as u16).unwrap();
        let q = quincunx_split(&grad_c(&img)).unwrap();
        let s = symbol_stream(&q);
        assert_eq!(sampling_from_symbols(8, 6, &s.symbols).unwrap(), q);
        // pairs couple (m, n) with (m, n + 1 mod w)
        let g = grad_c(&img);
        let mut k = 0;
        for m in 0..6 {
            for n in (0..8).filter(|n| (m + n) % 2 == 0) {
                assert_eq!(s.symbols[k], (g.fx()[m * 8 + n], g.fy()[m * 8 + (n + 1) % 8]));
                k += 1;
            }
        }
    }
}
