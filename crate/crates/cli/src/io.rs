use std::fmt;
use std::io::Write;
use std::path::Path;

use delcodec_core::codec::CodecError;
use delcodec_core::delcore::GradientError;
use delcodec_core::formats::{read_pgm, PgmError, SynthError};
use delcodec_core::renderer::RenderError;
use delcodec_core::ImageGrid;

pub const EXIT_IO: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_FLAGS: i32 = 3;
pub const EXIT_UNSAFE: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn flags(message: impl Into<String>) -> Self {
        Self::new(EXIT_FLAGS, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn io_error(path: &Path, err: std::io::Error) -> CliError {
    CliError::new(EXIT_IO, format!("{}: {err}", path.display()))
}

impl From<PgmError> for CliError {
    fn from(e: PgmError) -> Self {
        CliError::new(EXIT_MALFORMED, format!("malformed image: {e}"))
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        let code = match e {
            CodecError::RoundtripUnsafe { .. } | CodecError::DecodeUnsafe { .. } => EXIT_UNSAFE,
            _ => EXIT_MALFORMED,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<GradientError> for CliError {
    fn from(e: GradientError) -> Self {
        let code = match e {
            GradientError::TooSmall { .. } => EXIT_MALFORMED,
            _ => EXIT_FLAGS,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        CliError::flags(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::flags(e.to_string())
    }
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| io_error(path, e))
}

pub fn read_image(path: &Path) -> CliResult<ImageGrid> {
    let bytes = read_bytes(path)?;
    read_pgm(&bytes).map_err(|e| {
        CliError::new(
            EXIT_MALFORMED,
            format!("{}: malformed image: {e}", path.display()),
        )
    })
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed command never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}
