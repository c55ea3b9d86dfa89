//! Deterministic synthetic test images.
//!
//! Noise uses `ChaCha8Rng::seed_from_u64(seed)` from `rand_chacha` and
//! draws each pixel in row-major order with `gen_range(0..=max)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{BitDepth, ImageError, ImageGrid};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("wedge width {width} exceeds the {levels} levels of the bit depth")]
    WedgeTooWide { width: usize, levels: u32 },
    #[error("value {value} exceeds {max} for the bit depth")]
    ValueOutOfRange { value: u32, max: u32 },
    #[error("stripe period must be positive")]
    ZeroPeriod,
    #[error("cannot parse generator {0:?}")]
    Parse(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    Constant(u32),
    /// Pixel value equals the column index.
    WedgeHorizontal,
    /// Alternates `0` and `c` on a one-pixel checkerboard.
    Checkerboard(u32),
    UniformNoise {
        seed: u64,
    },
    /// Columns alternate between `0` and the maximum every `period` pixels.
    Stripes {
        period: usize,
    },
    /// Uniform noise averaged over a circular `(2r+1)^2` box, rounded.
    LowpassNoise {
        seed: u64,
        radius: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub generator: Generator,
    pub width: usize,
    pub height: usize,
    pub depth: BitDepth,
}

impl SyntheticSpec {
    pub fn new(generator: Generator, width: usize, height: usize, depth: BitDepth) -> Self {
        Self {
            generator,
            width,
            height,
            depth,
        }
    }
}

fn noise(seed: u64, width: usize, height: usize, max: u32) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..width * height).map(|_| rng.gen_range(0..=max)).collect()
}

fn box_blur(values: &[u32], width: usize, height: usize, radius: usize) -> Vec<u32> {
    let r = radius as isize;
    let taps = ((2 * radius + 1) * (2 * radius + 1)) as u64;
    let (w, h) = (width as isize, height as isize);
    let mut out = Vec::with_capacity(values.len());
    for m in 0..h {
        for n in 0..w {
            let mut acc = 0u64;
            for dm in -r..=r {
                let row = (m + dm).rem_euclid(h) * w;
                for dn in -r..=r {
                    acc += u64::from(values[(row + (n + dn).rem_euclid(w)) as usize]);
                }
            }
            // round half up in exact integer arithmetic
            out.push(((2 * acc + taps) / (2 * taps)) as u32);
        }
    }
    out
}

pub fn synthesize(spec: &SyntheticSpec) -> Result<ImageGrid, SynthError> {
    let (w, h) = (spec.width, spec.height);
    let max = spec.depth.max_value();
    let check = |v: u32| {
        if v > max {
            Err(SynthError::ValueOutOfRange { value: v, max })
        } else {
            Ok(v as u16)
        }
    };
    let pixels: Vec<u16> = match spec.generator {
        Generator::Constant(c) => vec![check(c)?; w * h],
        Generator::WedgeHorizontal => {
            if w > spec.depth.levels() as usize {
                return Err(SynthError::WedgeTooWide {
                    width: w,
                    levels: spec.depth.levels(),
                });
            }
            (0..w * h).map(|i| (i % w.max(1)) as u16).collect()
        }
        Generator::Checkerboard(c) => {
            let c = check(c)?;
            (0..w * h)
                .map(|i| {
                    if (i / w.max(1) + i % w.max(1)) % 2 == 0 {
                        0
                    } else {
                        c
                    }
                })
                .collect()
        }
        Generator::UniformNoise { seed } => noise(seed, w, h, max).into_iter().map(|v| v as u16).collect(),
        Generator::Stripes { period } => {
            if period == 0 {
                return Err(SynthError::ZeroPeriod);
            }
            (0..w * h)
                .map(|i| {
                    if (i % w.max(1) / period) % 2 == 0 {
                        0
                    } else {
                        max as u16
                    }
                })
                .collect()
        }
        Generator::LowpassNoise { seed, radius } => {
            let raw = noise(seed, w, h, max);
            box_blur(&raw, w, h, radius)
                .into_iter()
                .map(|v| v as u16)
                .collect()
        }
    };
    Ok(ImageGrid::new(w, h, spec.depth, pixels)?)
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Constant(c) => write!(f, "constant:{c}"),
            Generator::WedgeHorizontal => write!(f, "wedge"),
            Generator::Checkerboard(c) => write!(f, "checkerboard:{c}"),
            Generator::UniformNoise { seed } => write!(f, "noise:{seed}"),
            Generator::Stripes { period } => write!(f, "stripes:{period}"),
            Generator::LowpassNoise { seed, radius } => write!(f, "lowpass:{seed}:{radius}"),
        }
    }
}

/// Parses the [`Display`](fmt::Display) form, e.g. `noise:1` or `lowpass:7:2`.
impl FromStr for Generator {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || SynthError::Parse(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<u64, SynthError> {
            parts.get(i).ok_or_else(err)?.parse().map_err(|_| err())
        };
        let g = match (parts[0], parts.len()) {
            ("constant", 2) => Generator::Constant(num(1)?.try_into().map_err(|_| err())?),
            ("wedge", 1) => Generator::WedgeHorizontal,
            ("checkerboard", 2) => Generator::Checkerboard(num(1)?.try_into().map_err(|_| err())?),
            ("noise", 2) => Generator::UniformNoise { seed: num(1)? },
            ("stripes", 2) => Generator::Stripes {
                period: num(1)? as usize,
            },
            ("lowpass", 3) => Generator::LowpassNoise {
                seed: num(1)?,
                radius: num(2)? as usize,
            },
            _ => return Err(err()),
        };
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delcore::first_order_entropy;

    fn eight(g: Generator, w: usize, h: usize) -> Result<ImageGrid, SynthError> {
        synthesize(&SyntheticSpec::new(g, w, h, BitDepth::Eight))
    }

    #[test]
    fn wedge_is_column_index() {
        let img = eight(Generator::WedgeHorizontal, 256, 256).unwrap();
        assert!((0..256).all(|n| img.get(17, n) == n as u16));
        assert_eq!(first_order_entropy(&img), 8.0);
        assert!(matches!(
            eight(Generator::WedgeHorizontal, 257, 2),
            Err(SynthError::WedgeTooWide { .. })
        ));
    }

    #[test]
    fn constant_and_checkerboard() {
        assert!(eight(Generator::Constant(7), 4, 4)
            .unwrap()
            .pixels()
            .iter()
            .all(|&p| p == 7));
        let cb = eight(Generator::Checkerboard(9), 3, 3).unwrap();
        assert_eq!(cb.pixels(), &[0, 9, 0, 9, 0, 9, 0, 9, 0]);
        assert!(matches!(
            eight(Generator::Constant(256), 2, 2),
            Err(SynthError::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn noise_is_deterministic() {
        let a = eight(Generator::UniformNoise { seed: 1 }, 16, 16).unwrap();
        let b = eight(Generator::UniformNoise { seed: 1 }, 16, 16).unwrap();
        let c = eight(Generator::UniformNoise { seed: 2 }, 16, 16).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn stripes_and_lowpass() {
        let s = eight(Generator::Stripes { period: 2 }, 8, 2).unwrap();
        assert_eq!(&s.pixels()[..8], &[0, 0, 255, 255, 0, 0, 255, 255]);
        assert_eq!(
            eight(Generator::Stripes { period: 0 }, 8, 2),
            Err(SynthError::ZeroPeriod)
        );
        let lp = eight(Generator::LowpassNoise { seed: 3, radius: 2 }, 32, 32).unwrap();
        let raw = eight(Generator::UniformNoise { seed: 3 }, 32, 32).unwrap();
        assert!(first_order_entropy(&lp) < first_order_entropy(&raw));
        let zero = eight(Generator::LowpassNoise { seed: 3, radius: 0 }, 32, 32).unwrap();
        assert_eq!(zero, raw);
    }

    #[test]
    fn generator_strings_roundtrip() {
        for g in [
            Generator::Constant(5),
            Generator::WedgeHorizontal,
            Generator::Checkerboard(200),
            Generator::UniformNoise { seed: 11 },
            Generator::Stripes { period: 4 },
            Generator::LowpassNoise { seed: 2, radius: 3 },
        ] {
            assert_eq!(g.to_string().parse::<Generator>().unwrap(), g);
        }
        assert!("wobble".parse::<Generator>().is_err());
        assert!("noise".parse::<Generator>().is_err());
    }
}
