//! Gradient-histogram ("delentropy") analysis of grayscale images and a
//! lossless codec built on quincunx-sampled derivatives.

pub mod codec;
pub mod delcore;
pub mod entropy1d;
pub mod formats;
pub mod image;
pub mod renderer;
pub mod spectral;

pub use codec::{decode, encode, CodecError, EncodeStats, EncodedImage};
pub use delcore::{
    compute_gradient, deldensity, delentropy, Deldensity2D, EntropyReport, GradientError, GradientField,
};
pub use image::{BitDepth, EdgeMode, ImageError, ImageGrid, RealGrid};
pub use renderer::{DensityImage, RenderConfig, RenderError, RenderMethod, ToneMap};
pub use spectral::{KernelId, KernelSpec};
