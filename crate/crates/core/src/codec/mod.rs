//! Lossless gradient-domain codec.
//!
//! Encoding: kernel-C circular gradient, quincunx half-rate sampling of
//! `fx` and `fy`, Huffman coding of pair symbols, plus a line-statistics
//! side channel. Decoding inverts each stage and rounds.

pub mod container;
pub mod filterbank;
pub mod huffman;
pub mod quincunx;
pub mod side_channel;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delcore::{compute_gradient, GradientError};
use crate::entropy1d::shannon_entropy;
use crate::image::{EdgeMode, ImageError, ImageGrid, RealGrid};
use crate::spectral::{KernelId, KernelSpec};

pub use container::{ContainerError, EncodedImage};
pub use filterbank::{gamma_analysis, reconstruct_quincunx, FilterBankError, GammaAnalysis};
pub use huffman::{huffman_build, huffman_decode, huffman_encode, HuffmanError, HuffmanTable};
pub use quincunx::{
    quincunx_split, sampling_from_symbols, symbol_stream, QuincunxError, QuincunxSampling, SymbolStream,
};
pub use side_channel::{side_channel_apply, side_channel_extract, SideChannel, SideChannelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("codec needs even dimensions, got {width}x{height}")]
    OddDimensions { width: usize, height: usize },
    #[error("reconstruction error {max_error:.6} at ({m}, {n}) would not round back to the source")]
    RoundtripUnsafe { max_error: f64, m: usize, n: usize },
    #[error("decoded value {value:.6} at ({m}, {n}) lies outside the pixel range")]
    DecodeUnsafe { value: f64, m: usize, n: usize },
    #[error(transparent)]
    Gradient(#[from] GradientError),
    #[error(transparent)]
    Quincunx(#[from] QuincunxError),
    #[error(transparent)]
    Huffman(#[from] HuffmanError),
    #[error(transparent)]
    FilterBank(#[from] FilterBankError),
    #[error(transparent)]
    SideChannel(#[from] SideChannelError),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Rate and accuracy figures reported by [`encode`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeStats {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub symbol_count: u64,
    pub distinct_symbols: usize,
    pub payload_bits: u64,
    pub pair_entropy: f64,
    pub header_bytes: usize,
    pub table_bytes: usize,
    pub side_channel_bytes: usize,
    pub payload_bytes: usize,
    pub total_bytes: usize,
    /// Total container bits per source pixel.
    pub bpp: f64,
    /// Largest `|decoded - source|` before rounding.
    pub max_pre_rounding_error: f64,
    pub wide_symbols: bool,
}

impl EncodeStats {
    /// Payload bits per pair symbol.
    pub fn bits_per_symbol(&self) -> f64 {
        self.payload_bits as f64 / self.symbol_count as f64
    }

    /// Side-channel size relative to the raw source raster.
    pub fn side_channel_fraction(&self) -> f64 {
        let raw = self.width * self.height * usize::from(self.bit_depth / 8);
        self.side_channel_bytes as f64 / raw as f64
    }
}

fn max_error(recon: &RealGrid, image: &ImageGrid) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for (i, (&r, &p)) in recon.data.iter().zip(image.pixels()).enumerate() {
        let e = (r - f64::from(p)).abs();
        if !(e <= worst.0) {
            worst = (e, i / image.width(), i % image.width());
        }
    }
    worst
}

pub fn encode(image: &ImageGrid) -> Result<(EncodedImage, EncodeStats), CodecError> {
    let (w, h) = (image.width(), image.height());
    if !image.has_even_dims() || w < 2 || h < 2 {
        return Err(CodecError::OddDimensions { width: w, height: h });
    }
    let grad = compute_gradient(image, &KernelSpec::C, EdgeMode::Circular)?;
    let samp = quincunx_split(&grad)?;
    let stream = symbol_stream(&samp);
    let table = huffman_build(&stream.density)?;
    let (payload, bit_count) = huffman_encode(&stream.symbols, &table)?;
    let side_channel = side_channel_extract(image);

    let mut recon = reconstruct_quincunx(&samp, &KernelSpec::C)?;
    side_channel_apply(&mut recon, &side_channel)?;
    let (err, m, n) = max_error(&recon, image);
    if !(err < 0.5) {
        return Err(CodecError::RoundtripUnsafe { max_error: err, m, n });
    }

    let wide = stream
        .density
        .bins()
        .iter()
        .any(|((x, y), _)| i16::try_from(*x).is_err() || i16::try_from(*y).is_err());
    let enc = EncodedImage {
        version: container::VERSION,
        kernel: KernelId::C,
        flags: if wide { container::FLAG_WIDE_SYMBOLS } else { 0 },
        depth: image.depth(),
        width: w as u32,
        height: h as u32,
        table,
        side_channel,
        symbol_count: stream.symbols.len() as u64,
        bit_count,
        payload,
    };
    let total = enc.total_bytes();
    let stats = EncodeStats {
        width: w,
        height: h,
        bit_depth: image.depth().bits(),
        symbol_count: enc.symbol_count,
        distinct_symbols: enc.table.len(),
        payload_bits: bit_count,
        pair_entropy: shannon_entropy(&stream.density).map_err(GradientError::from)?,
        header_bytes: container::HEADER_LEN,
        table_bytes: enc.table_bytes(),
        side_channel_bytes: enc.side_channel_bytes(),
        payload_bytes: enc.payload_bytes(),
        total_bytes: total,
        bpp: (total * 8) as f64 / (w * h) as f64,
        max_pre_rounding_error: err,
        wide_symbols: wide,
    };
    Ok((enc, stats))
}

/// Decoded values before rounding.
pub fn decode_real(enc: &EncodedImage) -> Result<RealGrid, CodecError> {
    let (w, h) = (enc.width as usize, enc.height as usize);
    let symbols = huffman_decode(&enc.payload, enc.bit_count, &enc.table, enc.symbol_count)?;
    let samp = sampling_from_symbols(w, h, &symbols)?;
    let mut recon = reconstruct_quincunx(&samp, &KernelSpec::of(enc.kernel))?;
    side_channel_apply(&mut recon, &enc.side_channel)?;
    Ok(recon)
}

/// Rounds to the nearest level.
///
/// Fails when a value lies half a level or more outside the pixel range,
/// which no valid encoding produces.
pub fn decode(enc: &EncodedImage) -> Result<ImageGrid, CodecError> {
    let recon = decode_real(enc)?;
    let max = f64::from(enc.depth.max_value());
    let w = recon.width;
    let mut pixels = Vec::with_capacity(recon.data.len());
    for (i, &v) in recon.data.iter().enumerate() {
        if !(v > -0.5 && v < max + 0.5) {
            return Err(CodecError::DecodeUnsafe {
                value: v,
                m: i / w,
                n: i % w,
            });
        }
        pixels.push(v.round().clamp(0.0, max) as u16);
    }
    Ok(ImageGrid::new(w, recon.height, enc.depth, pixels)?)
}
