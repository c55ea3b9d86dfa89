//! File formats and test-image generation.

pub mod pgm;
pub mod synth;

pub use pgm::{read_pgm, write_pgm, PgmError};
pub use synth::{synthesize, Generator, SynthError, SyntheticSpec};
