//! One-dimensional histograms, entropy, finite differences and the exact
//! inversions that recover a signal from its derivative.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{BitDepth, EdgeMode};
use crate::spectral::{dft_forward_1d_real, dft_inverse_1d};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("signal is empty")]
    EmptySignal,
    #[error("signal needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("sample {value} at index {index} outside [{lo}, {hi}]")]
    SampleOutOfRange {
        index: usize,
        value: i64,
        lo: i64,
        hi: i64,
    },
    #[error("density is not normalized (weights sum to {0})")]
    Unnormalized(f64),
    #[error("density is empty")]
    EmptyDensity,
    #[error("identity requires circular edge mode")]
    RequiresCircular,
    #[error("frequency {0} is lost by the kernel but carries derivative content")]
    LostFrequency(i64),
    #[error(
        "endpoint values disagree with the derivative sum (expected f(b) - f(a) = {expected}, got {actual})"
    )]
    InconsistentEndpoints { expected: i64, actual: i64 },
    #[error("derivative must be non-empty")]
    EmptyDerivative,
}

/// Integer-valued 1D signal with a declared bit depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signal1D {
    samples: Vec<i64>,
    depth: BitDepth,
}

impl Signal1D {
    /// A source signal: every sample in `[0, 2^depth - 1]`.
    pub fn source(samples: Vec<i64>, depth: BitDepth) -> Result<Self, EntropyError> {
        Self::checked(samples, depth, 0)
    }

    /// A difference signal: every sample in `[-(2^depth - 1), 2^depth - 1]`.
    pub fn difference(samples: Vec<i64>, depth: BitDepth) -> Result<Self, EntropyError> {
        let max = i64::from(depth.max_value());
        Self::checked(samples, depth, -max)
    }

    fn checked(samples: Vec<i64>, depth: BitDepth, lo: i64) -> Result<Self, EntropyError> {
        if samples.is_empty() {
            return Err(EntropyError::EmptySignal);
        }
        let hi = i64::from(depth.max_value());
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, &v)| v < lo || v > hi) {
            return Err(EntropyError::SampleOutOfRange { index, value, lo, hi });
        }
        Ok(Self { samples, depth })
    }

    pub fn samples(&self) -> &[i64] {
        &self.samples
    }

    pub fn depth(&self) -> BitDepth {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self {
            samples,
            depth: self.depth,
        }
    }
}

/// Anything that can be interpreted as integer counts over a total.
pub trait Histogram {
    fn total(&self) -> u64;
    fn nonzero_counts(&self) -> Box<dyn Iterator<Item = u64> + '_>;
}

/// Integer-binned histogram over a contiguous index range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Density1D {
    min: i64,
    counts: Vec<u64>,
    total: u64,
}

impl Density1D {
    /// Smallest index with a nonzero count.
    pub fn min(&self) -> i64 {
        self.min
    }

    /// Largest index with a nonzero count.
    pub fn max(&self) -> i64 {
        self.min + self.counts.len() as i64 - 1
    }

    pub fn count(&self, index: i64) -> u64 {
        if index < self.min || index > self.max() {
            0
        } else {
            self.counts[(index - self.min) as usize]
        }
    }

    pub fn weight(&self, index: i64) -> f64 {
        self.count(index) as f64 / self.total as f64
    }

    /// `(index, count)` for every occupied bin, ascending.
    pub fn bins(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (self.min + i as i64, c))
    }

    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Histogram of arbitrary integer samples.
    pub fn from_samples(samples: &[i64]) -> Result<Self, EntropyError> {
        let (&lo, &hi) = match (samples.iter().min(), samples.iter().max()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(EntropyError::EmptySignal),
        };
        let mut counts = vec![0u64; (hi - lo + 1) as usize];
        for &s in samples {
            counts[(s - lo) as usize] += 1;
        }
        Ok(Self {
            min: lo,
            counts,
            total: samples.len() as u64,
        })
    }

    /// Builds from explicit `(index, count)` pairs; zero counts are dropped.
    pub fn from_counts(pairs: &[(i64, u64)]) -> Result<Self, EntropyError> {
        let occupied: Vec<_> = pairs.iter().filter(|(_, c)| *c > 0).collect();
        let (lo, hi) = match (
            occupied.iter().map(|(i, _)| *i).min(),
            occupied.iter().map(|(i, _)| *i).max(),
        ) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(EntropyError::EmptyDensity),
        };
        let mut counts = vec![0u64; (hi - lo + 1) as usize];
        let mut total = 0u64;
        for (i, c) in occupied {
            counts[(i - lo) as usize] += c;
            total += c;
        }
        Ok(Self {
            min: lo,
            counts,
            total,
        })
    }
}

impl Histogram for Density1D {
    fn total(&self) -> u64 {
        self.total
    }

    fn nonzero_counts(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        Box::new(self.counts.iter().copied().filter(|&c| c > 0))
    }
}

/// `count[i]` = number of samples equal to `i`.
pub fn histogram1d(signal: &Signal1D) -> Density1D {
    Density1D::from_samples(signal.samples()).expect("signals are non-empty")
}

/// Shannon entropy in bits of an integer histogram.
pub fn shannon_entropy<H: Histogram + ?Sized>(density: &H) -> Result<f64, EntropyError> {
    let total = density.total();
    let sum: u64 = density.nonzero_counts().sum();
    if total == 0 {
        return Err(EntropyError::EmptyDensity);
    }
    if sum != total {
        return Err(EntropyError::Unnormalized(sum as f64 / total as f64));
    }
    let t = total as f64;
    let h: f64 = density
        .nonzero_counts()
        .map(|c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum();
    Ok(h.max(0.0))
}

/// Shannon entropy of explicit probabilities; they must sum to 1.
pub fn entropy_of_weights(weights: &[f64]) -> Result<f64, EntropyError> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(EntropyError::Unnormalized(sum));
    }
    Ok(weights.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.log2()).sum())
}

/// `f(n) - f(n-1)`; `Valid` drops the first sample, `Circular` wraps it.
pub fn backward_difference(signal: &Signal1D, edge: EdgeMode) -> Result<Signal1D, EntropyError> {
    let s = signal.samples();
    if s.len() < 2 {
        return Err(EntropyError::TooShort(s.len()));
    }
    let mut d: Vec<i64> = Vec::with_capacity(s.len());
    if edge == EdgeMode::Circular {
        d.push(s[0] - s[s.len() - 1]);
    }
    d.extend(s.windows(2).map(|w| w[1] - w[0]));
    Signal1D::difference(d, signal.depth())
}

/// Entropy of the backward-difference histogram.
pub fn delentropy1d(signal: &Signal1D, edge: EdgeMode) -> Result<f64, EntropyError> {
    shannon_entropy(&histogram1d(&backward_difference(signal, edge)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet1D {
    pub mean: f64,
    pub mean_square: f64,
    pub variance: f64,
}

/// Integer sufficient statistics; two sets agree iff the moments agree in
/// rational arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMoments1D {
    pub total: u64,
    pub sum: i128,
    pub sum_sq: i128,
}

impl ExactMoments1D {
    pub fn of_samples(samples: &[i64]) -> Self {
        Self {
            total: samples.len() as u64,
            sum: samples.iter().map(|&v| i128::from(v)).sum(),
            sum_sq: samples.iter().map(|&v| i128::from(v) * i128::from(v)).sum(),
        }
    }

    pub fn to_moments(self) -> MomentSet1D {
        let t = self.total as f64;
        let mean = self.sum as f64 / t;
        let mean_square = self.sum_sq as f64 / t;
        // t*sum_sq - sum^2 is exact, so the variance is rounded only once
        let centered = i128::from(self.total) * self.sum_sq - self.sum * self.sum;
        let variance = centered as f64 / (t * t);
        MomentSet1D {
            mean,
            mean_square,
            variance,
        }
    }
}

/// Histogram moments via `sum_j j^k count_j`.
pub fn moments1d_exact(density: &Density1D) -> ExactMoments1D {
    let mut sum = 0i128;
    let mut sum_sq = 0i128;
    for (j, c) in density.bins() {
        let (j, c) = (i128::from(j), i128::from(c));
        sum += j * c;
        sum_sq += j * j * c;
    }
    ExactMoments1D {
        total: density.total,
        sum,
        sum_sq,
    }
}

pub fn moments1d(density: &Density1D) -> Result<MomentSet1D, EntropyError> {
    if density.total == 0 {
        return Err(EntropyError::EmptyDensity);
    }
    Ok(moments1d_exact(density).to_moments())
}

/// Multiplier of the circular backward difference, `1 - exp(-2 pi i k / len)`.
fn two_point_multiplier(k: i64, len: usize) -> Complex64 {
    Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64)
}

/// Variance of the circular backward difference computed in the frequency
/// domain: `sum_k |G(k) F(k)|^2 - |G(0) F(0)|^2`.
pub fn spectral_variance1d(signal: &Signal1D, edge: EdgeMode) -> Result<f64, EntropyError> {
    if edge != EdgeMode::Circular {
        return Err(EntropyError::RequiresCircular);
    }
    if signal.len() < 2 {
        return Err(EntropyError::TooShort(signal.len()));
    }
    let x: Vec<f64> = signal.samples().iter().map(|&v| v as f64).collect();
    let spectrum = dft_forward_1d_real(&x);
    let len = x.len();
    let mut power = 0.0;
    for (slot, f) in spectrum.values().iter().enumerate() {
        let k = spectrum.frequency(slot);
        power += (two_point_multiplier(k, len) * f).norm_sqr();
    }
    // the derivative mean is G(0) F(0) = 0
    Ok(power)
}

/// 1D differentiators understood by [`reconstruct1d`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Derivative1D {
    /// Circular backward difference `f(n) - f(n-1)`.
    TwoPoint,
    /// Spectral derivative `2 pi i k / len` with the Nyquist bin zeroed.
    Fourier,
}

impl Derivative1D {
    fn multiplier(self, k: i64, len: usize) -> Complex64 {
        match self {
            Derivative1D::TwoPoint => two_point_multiplier(k, len),
            Derivative1D::Fourier => {
                if len % 2 == 0 && k == -(len as i64 / 2) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, 2.0 * PI * k as f64 / len as f64)
                }
            }
        }
    }

    /// Applies the derivative to a real signal (circular).
    pub fn apply(self, signal: &[f64]) -> Vec<f64> {
        let len = signal.len();
        let mut s = dft_forward_1d_real(signal);
        for slot in 0..len {
            let k = s.frequency(slot);
            let g = self.multiplier(k, len);
            s.values_mut()[slot] *= g;
        }
        dft_inverse_1d(&s).into_iter().map(|v| v.re).collect()
    }
}

/// Output of [`reconstruct1d`]: the signal plus frequencies that had to be
/// left at zero because the multiplier vanished and no value was supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction1D {
    pub samples: Vec<f64>,
    pub unrecovered: Vec<i64>,
}

/// Fourier-domain anti-derivative.
///
/// `dc` replaces the zero-frequency bin (it is the signal mean). `nyquist`,
/// if given, is the coefficient `mean((-1)^n f(n))` and replaces the Nyquist
/// bin wherever the multiplier vanishes there.
pub fn reconstruct1d(
    derivative: &[f64],
    dc: f64,
    kernel: Derivative1D,
    nyquist: Option<f64>,
) -> Result<Reconstruction1D, EntropyError> {
    let len = derivative.len();
    if len == 0 {
        return Err(EntropyError::EmptyDerivative);
    }
    let spectrum = dft_forward_1d_real(derivative);
    let scale = spectrum
        .values()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    let g_max = (0..len)
        .map(|slot| kernel.multiplier(spectrum.frequency(slot), len).norm())
        .fold(0.0, f64::max);
    let mut out = spectrum.clone();
    let mut unrecovered = Vec::new();
    for slot in 0..len {
        let k = spectrum.frequency(slot);
        let d = spectrum.values()[slot];
        let g = kernel.multiplier(k, len);
        let value = if k == 0 {
            Complex64::new(dc, 0.0)
        } else if g.norm() > 1e-9 * g_max {
            d / g
        } else {
            if d.norm() > 1e-9 * scale {
                return Err(EntropyError::LostFrequency(k));
            }
            let is_nyquist = len % 2 == 0 && k == -(len as i64 / 2);
            match (is_nyquist, nyquist) {
                (true, Some(v)) => Complex64::new(v, 0.0),
                _ => {
                    unrecovered.push(k);
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        out.values_mut()[slot] = value;
    }
    Ok(Reconstruction1D {
        samples: dft_inverse_1d(&out).into_iter().map(|v| v.re).collect(),
        unrecovered,
    })
}

/// Integration from the left: `f(x) = f(a) + sum_{t <= x} f_x(t)`.
pub fn causal_integrate(derivative: &[i64], start: i64) -> Vec<i64> {
    let mut out = Vec::with_capacity(derivative.len() + 1);
    let mut acc = start;
    out.push(acc);
    for &d in derivative {
        acc += d;
        out.push(acc);
    }
    out
}

/// Integration from the right: `f(x) = f(b) - sum_{t > x} f_x(t)`.
pub fn anticausal_integrate(derivative: &[i64], end: i64) -> Vec<i64> {
    let mut out = vec![0i64; derivative.len() + 1];
    let mut acc = end;
    out[derivative.len()] = acc;
    for (i, &d) in derivative.iter().enumerate().rev() {
        acc -= d;
        out[i] = acc;
    }
    out
}

/// Average of the causal and anti-causal integrals; needs both endpoints.
pub fn symmetric_integrate1d(derivative: &[i64], start: i64, end: i64) -> Result<Vec<f64>, EntropyError> {
    if derivative.is_empty() {
        return Err(EntropyError::EmptyDerivative);
    }
    let total: i64 = derivative.iter().sum();
    if end - start != total {
        return Err(EntropyError::InconsistentEndpoints {
            expected: total,
            actual: end - start,
        });
    }
    let left = causal_integrate(derivative, start);
    let right = anticausal_integrate(derivative, end);
    Ok(left
        .iter()
        .zip(&right)
        .map(|(&a, &b)| (a + b) as f64 / 2.0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig(v: &[i64]) -> Signal1D {
        Signal1D::source(v.to_vec(), BitDepth::Eight).unwrap()
    }

    #[test]
    fn histogram_examples() {
        let d = histogram1d(&sig(&[5, 5, 7]));
        assert_eq!(d.count(5), 2);
        assert_eq!(d.count(6), 0);
        assert!((d.weight(7) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!((d.min(), d.max()), (5, 7));

        let c = histogram1d(&sig(&[9; 40]));
        assert_eq!(c.occupied(), 1);
        assert_eq!(c.weight(9), 1.0);

        let ramp: Vec<i64> = (0..256).collect();
        let r = histogram1d(&sig(&ramp));
        assert!(r.bins().all(|(_, c)| c == 1));
        assert_eq!(shannon_entropy(&r).unwrap(), 8.0);
    }

    #[test]
    fn empty_signal_rejected() {
        assert_eq!(
            Signal1D::source(vec![], BitDepth::Eight),
            Err(EntropyError::EmptySignal)
        );
        assert!(matches!(
            Signal1D::source(vec![300], BitDepth::Eight),
            Err(EntropyError::SampleOutOfRange { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(shannon_entropy(&histogram1d(&sig(&[3, 3]))).unwrap(), 0.0);
        assert_eq!(entropy_of_weights(&vec![1.0 / 256.0; 256]).unwrap(), 8.0);
        assert!((entropy_of_weights(&[0.5, 0.25, 0.25]).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(
            entropy_of_weights(&[0.5, 0.25]),
            Err(EntropyError::Unnormalized(_))
        ));
    }

    #[test]
    fn difference_examples() {
        let d = backward_difference(&sig(&[1, 4, 9, 16]), EdgeMode::Valid).unwrap();
        assert_eq!(d.samples(), &[3, 5, 7]);
        let z = backward_difference(&sig(&[6; 5]), EdgeMode::Valid).unwrap();
        assert!(z.samples().iter().all(|&v| v == 0));
        let c = backward_difference(&sig(&[0, 1, 2, 3]), EdgeMode::Circular).unwrap();
        assert_eq!(c.samples(), &[-3, 1, 1, 1]);
        assert_eq!(
            backward_difference(&sig(&[1]), EdgeMode::Valid),
            Err(EntropyError::TooShort(1))
        );
    }

    #[test]
    fn delentropy_examples() {
        let ramp: Vec<i64> = (0..256).collect();
        assert_eq!(delentropy1d(&sig(&ramp), EdgeMode::Valid).unwrap(), 0.0);
        let alt: Vec<i64> = (0..65).map(|i| if i % 2 == 0 { 0 } else { 255 }).collect();
        assert_eq!(delentropy1d(&sig(&alt), EdgeMode::Valid).unwrap(), 1.0);
    }

    #[test]
    fn iid_uniform_delentropy_below_triangular_law() {
        // p(d) = (256 - |d|) / 65536 is the exact difference law of two iid
        // uniform bytes.
        let oracle: f64 = (-255i64..=255)
            .map(|d| {
                let p = (256 - d.abs()) as f64 / 65536.0;
                -p * p.log2()
            })
            .sum();
        assert!((oracle - 8.7213).abs() < 1e-3, "{oracle}");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s: Vec<i64> = (0..65536).map(|_| rng.gen_range(0..256)).collect();
        let h = delentropy1d(&sig(&s), EdgeMode::Valid).unwrap();
        // plug-in bias is about 510 / (2 N ln 2) = 0.0056 bits plus sampling noise
        assert!(h <= oracle && h > oracle - 0.03, "h = {h}, oracle = {oracle}");
    }

    #[test]
    fn moment_examples() {
        let pm = Density1D::from_counts(&[(-1, 1), (1, 1)]).unwrap();
        let m = moments1d(&pm).unwrap();
        assert_eq!((m.mean, m.variance), (0.0, 1.0));
        let single = Density1D::from_counts(&[(7, 3)]).unwrap();
        let m = moments1d(&single).unwrap();
        assert_eq!((m.mean, m.variance), (7.0, 0.0));
        let ramp: Vec<i64> = (0..256).collect();
        let d = backward_difference(&sig(&ramp), EdgeMode::Valid).unwrap();
        let m = moments1d(&histogram1d(&d)).unwrap();
        assert_eq!((m.mean, m.variance), (1.0, 0.0));
        assert!((m.mean_square - m.mean * m.mean - m.variance).abs() < 1e-12);
    }

    #[test]
    fn spectral_variance_examples() {
        assert!(
            spectral_variance1d(&sig(&[4; 16]), EdgeMode::Circular)
                .unwrap()
                .abs()
                < 1e-20
        );
        // amplitude a alternation: circular difference is +-2a, variance 4a^2
        let a = 20i64;
        let alt: Vec<i64> = (0..32).map(|i| 100 + if i % 2 == 0 { a } else { -a }).collect();
        let v = spectral_variance1d(&sig(&alt), EdgeMode::Circular).unwrap();
        assert!((v - 4.0 * (a * a) as f64).abs() < 1e-9 * v);
        assert_eq!(
            spectral_variance1d(&sig(&alt), EdgeMode::Valid),
            Err(EntropyError::RequiresCircular)
        );
    }

    #[test]
    fn reconstruct_examples() {
        let r = reconstruct1d(&[0.0; 8], 5.0, Derivative1D::TwoPoint, None).unwrap();
        assert!(r.samples.iter().all(|&v| (v - 5.0).abs() < 1e-12));

        let d = backward_difference(&sig(&[3, 1, 4, 1]), EdgeMode::Circular).unwrap();
        let dv: Vec<f64> = d.samples().iter().map(|&v| v as f64).collect();
        let r = reconstruct1d(&dv, 2.25, Derivative1D::TwoPoint, None).unwrap();
        for (a, b) in r.samples.iter().zip([3.0, 1.0, 4.0, 1.0]) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(r.unrecovered.is_empty());
    }

    #[test]
    fn fourier_derivative_loses_exactly_the_nyquist_component() {
        let len = 16;
        let smooth: Vec<f64> = (0..len)
            .map(|n| 50.0 + 10.0 * (2.0 * PI * n as f64 / len as f64).sin())
            .collect();
        let amp = 3.0;
        let with_nyq: Vec<f64> = smooth
            .iter()
            .enumerate()
            .map(|(n, v)| v + if n % 2 == 0 { amp } else { -amp })
            .collect();
        let mean = with_nyq.iter().sum::<f64>() / len as f64;
        let deriv = Derivative1D::Fourier.apply(&with_nyq);
        let lost = reconstruct1d(&deriv, mean, Derivative1D::Fourier, None).unwrap();
        assert_eq!(lost.unrecovered, vec![-(len as i64) / 2]);
        for (n, (r, o)) in lost.samples.iter().zip(&with_nyq).enumerate() {
            let alt = if n % 2 == 0 { amp } else { -amp };
            assert!((o - r - alt).abs() < 1e-9);
        }
        let full = reconstruct1d(&deriv, mean, Derivative1D::Fourier, Some(amp)).unwrap();
        for (r, o) in full.samples.iter().zip(&with_nyq) {
            assert!((r - o).abs() < 1e-9);
        }
    }

    #[test]
    fn lost_frequency_with_content_is_an_error() {
        // a constant "derivative" has DC content the Fourier kernel can never produce,
        // and a Nyquist-only signal is one it cannot produce either
        let alt: Vec<f64> = (0..8).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(
            reconstruct1d(&alt, 0.0, Derivative1D::Fourier, None),
            Err(EntropyError::LostFrequency(-4))
        );
    }

    #[test]
    fn symmetric_integration_examples() {
        let r = symmetric_integrate1d(&[3, 5, 7], 1, 16).unwrap();
        assert_eq!(r, vec![1.0, 4.0, 9.0, 16.0]);
        let c = symmetric_integrate1d(&[0, 0, 0], 7, 7).unwrap();
        assert_eq!(c, vec![7.0; 4]);
        assert!(matches!(
            symmetric_integrate1d(&[1, 1], 0, 5),
            Err(EntropyError::InconsistentEndpoints { .. })
        ));
    }

    #[test]
    fn symmetric_agrees_with_fourier_division() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s: Vec<i64> = (0..32).map(|_| rng.gen_range(0..256)).collect();
        let valid = backward_difference(&sig(&s), EdgeMode::Valid).unwrap();
        let sym = symmetric_integrate1d(valid.samples(), s[0], s[31]).unwrap();
        let circ = backward_difference(&sig(&s), EdgeMode::Circular).unwrap();
        let cv: Vec<f64> = circ.samples().iter().map(|&v| v as f64).collect();
        let mean = s.iter().sum::<i64>() as f64 / 32.0;
        let fourier = reconstruct1d(&cv, mean, Derivative1D::TwoPoint, None).unwrap();
        for (a, b) in sym.iter().zip(&fourier.samples) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn delentropy_bounded_and_reflection_invariant(
            v in proptest::collection::vec(0i64..256, 2..200)
        ) {
            let s = sig(&v);
            let h = delentropy1d(&s, EdgeMode::Valid).unwrap();
            let distinct = histogram1d(&backward_difference(&s, EdgeMode::Valid).unwrap()).occupied();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (distinct as f64).log2() + 1e-12);
            let hr = delentropy1d(&s.reversed(), EdgeMode::Valid).unwrap();
            prop_assert!((h - hr).abs() < 1e-12);
        }

        #[test]
        fn sifting_identity_is_exact(v in proptest::collection::vec(-255i64..256, 1..300)) {
            let d = Density1D::from_samples(&v).unwrap();
            prop_assert_eq!(moments1d_exact(&d), ExactMoments1D::of_samples(&v));
        }

        #[test]
        fn integrations_are_exact(v in proptest::collection::vec(0i64..65536, 2..100)) {
            let s = Signal1D::source(v.clone(), BitDepth::Sixteen).unwrap();
            let d = backward_difference(&s, EdgeMode::Valid).unwrap();
            prop_assert_eq!(causal_integrate(d.samples(), v[0]), v.clone());
            prop_assert_eq!(anticausal_integrate(d.samples(), v[v.len() - 1]), v.clone());
            let sym = symmetric_integrate1d(d.samples(), v[0], v[v.len() - 1]).unwrap();
            prop_assert!(sym.iter().zip(&v).all(|(a, &b)| *a == b as f64));
        }
    }
}
