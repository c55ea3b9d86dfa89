//! `.dle` byte layout. All integers little-endian.
//!
//! ```text
//! "DLE1" | u8 version | u8 kernel | u8 flags | u8 depth | u32 width | u32 height
//! u32 S | S x { fx, fy, u8 length }          fx, fy: i16 (i32 with FLAG_WIDE_SYMBOLS)
//! u32 side-channel bytes | i32 values
//! u64 symbol count | u64 bit count | payload
//! ```

use thiserror::Error;

use super::huffman::{HuffmanError, HuffmanTable, Symbol};
use super::side_channel::{SideChannel, SideChannelError};
use crate::image::BitDepth;
use crate::spectral::KernelId;

pub const MAGIC: [u8; 4] = *b"DLE1";
pub const VERSION: u8 = 1;
/// Side channel entropy-coded. Reserved; never written.
pub const FLAG_CODED_SIDE_CHANNEL: u8 = 0b01;
/// Symbol records carry 32-bit components.
pub const FLAG_WIDE_SYMBOLS: u8 = 0b10;
pub const HEADER_LEN: usize = 16;
/// Upper bound on `width * height` accepted by the parser.
pub const MAX_PIXELS: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContainerError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported kernel id {0}")]
    UnsupportedKernel(u8),
    #[error("unsupported flag bits {0:#04x}")]
    UnsupportedFlags(u8),
    #[error("unsupported bit depth {0}")]
    BadDepth(u8),
    #[error("dimensions {width}x{height} are not representable")]
    DimensionOverflow { width: u32, height: u32 },
    #[error("dimensions {width}x{height} must be even and at least 2")]
    BadDimensions { width: u32, height: u32 },
    #[error("truncated {section}: need {needed} bytes, {available} available")]
    Truncated {
        section: &'static str,
        needed: u64,
        available: usize,
    },
    #[error("code table has {0} entries but the image has fewer pair sites")]
    TableTooLarge(u32),
    #[error("symbol component {0} does not fit a narrow record")]
    SymbolOverflow(i32),
    #[error("symbol count {actual} does not match {expected} pair sites")]
    SymbolCount { expected: u64, actual: u64 },
    #[error("payload holds {bytes} bytes, bit count {bits} needs {needed}")]
    PayloadLength { bits: u64, bytes: u64, needed: u64 },
    #[error("{0} trailing bytes after the payload")]
    TrailingBytes(usize),
    #[error("code table: {0}")]
    Table(#[from] HuffmanError),
    #[error("side channel: {0}")]
    SideChannel(#[from] SideChannelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedImage {
    pub version: u8,
    pub kernel: KernelId,
    pub flags: u8,
    pub depth: BitDepth,
    pub width: u32,
    pub height: u32,
    pub table: HuffmanTable,
    pub side_channel: SideChannel,
    pub symbol_count: u64,
    pub bit_count: u64,
    pub payload: Vec<u8>,
}

impl EncodedImage {
    fn wide(&self) -> bool {
        self.flags & FLAG_WIDE_SYMBOLS != 0
    }

    pub fn table_bytes(&self) -> usize {
        4 + self.table.len() * if self.wide() { 9 } else { 5 }
    }

    pub fn side_channel_bytes(&self) -> usize {
        4 + SideChannel::byte_len(self.width as usize, self.height as usize)
    }

    pub fn payload_bytes(&self) -> usize {
        16 + self.payload.len()
    }

    pub fn total_bytes(&self) -> usize {
        HEADER_LEN + self.table_bytes() + self.side_channel_bytes() + self.payload_bytes()
    }

    pub fn serialize(&self) -> Result<Vec<u8>, ContainerError> {
        let mut out = Vec::with_capacity(self.total_bytes());
        out.extend_from_slice(&MAGIC);
        out.push(self.version);
        out.push(self.kernel.code());
        out.push(self.flags);
        out.push(self.depth.bits());
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&(self.table.len() as u32).to_le_bytes());
        let wide = self.wide();
        for &((fx, fy), len) in self.table.entries() {
            if wide {
                out.extend_from_slice(&fx.to_le_bytes());
                out.extend_from_slice(&fy.to_le_bytes());
            } else {
                for v in [fx, fy] {
                    let narrow = i16::try_from(v).map_err(|_| ContainerError::SymbolOverflow(v))?;
                    out.extend_from_slice(&narrow.to_le_bytes());
                }
            }
            out.push(len);
        }
        let sc = self.side_channel.to_bytes();
        out.extend_from_slice(&(sc.len() as u32).to_le_bytes());
        out.extend_from_slice(&sc);
        out.extend_from_slice(&self.symbol_count.to_le_bytes());
        out.extend_from_slice(&self.bit_count.to_le_bytes());
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, ContainerError> {
        let mut r = Reader { bytes, pos: 0 };
        let magic: [u8; 4] = r.take(4, "header")?.try_into().unwrap();
        if magic != MAGIC {
            return Err(ContainerError::BadMagic(magic));
        }
        let version = r.u8("header")?;
        if version != VERSION {
            return Err(ContainerError::UnsupportedVersion(version));
        }
        let kernel_code = r.u8("header")?;
        let kernel = match KernelId::from_code(kernel_code) {
            Some(KernelId::C) => KernelId::C,
            _ => return Err(ContainerError::UnsupportedKernel(kernel_code)),
        };
        let flags = r.u8("header")?;
        if flags & !FLAG_WIDE_SYMBOLS != 0 {
            return Err(ContainerError::UnsupportedFlags(flags));
        }
        let depth_bits = r.u8("header")?;
        let depth = BitDepth::from_bits(depth_bits).map_err(|_| ContainerError::BadDepth(depth_bits))?;
        let width = r.u32("header")?;
        let height = r.u32("header")?;
        let pixels = u64::from(width) * u64::from(height);
        if pixels > MAX_PIXELS || usize::try_from(pixels).is_err() {
            return Err(ContainerError::DimensionOverflow { width, height });
        }
        if width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0 {
            return Err(ContainerError::BadDimensions { width, height });
        }
        let sites = pixels / 2;

        let entries = r.u32("code table")?;
        if u64::from(entries) > sites {
            return Err(ContainerError::TableTooLarge(entries));
        }
        let wide = flags & FLAG_WIDE_SYMBOLS != 0;
        let record = if wide { 9 } else { 5 };
        let block = r.take(u64::from(entries) * record, "code table")?;
        let lengths: Vec<(Symbol, u8)> = block
            .chunks_exact(record as usize)
            .map(|c| {
                if wide {
                    let fx = i32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                    let fy = i32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                    ((fx, fy), c[8])
                } else {
                    let fx = i16::from_le_bytes([c[0], c[1]]);
                    let fy = i16::from_le_bytes([c[2], c[3]]);
                    ((i32::from(fx), i32::from(fy)), c[4])
                }
            })
            .collect();
        let table = HuffmanTable::from_lengths(&lengths)?;

        let sc_len = r.u32("side channel")?;
        let sc_bytes = r.take(u64::from(sc_len), "side channel")?;
        let side_channel = SideChannel::from_bytes(width as usize, height as usize, sc_bytes)?;
        side_channel.check_consistency()?;

        let symbol_count = r.u64("payload")?;
        if symbol_count != sites {
            return Err(ContainerError::SymbolCount {
                expected: sites,
                actual: symbol_count,
            });
        }
        let bit_count = r.u64("payload")?;
        let needed = bit_count.div_ceil(8);
        let available = (bytes.len() - r.pos) as u64;
        if available != needed {
            return Err(ContainerError::PayloadLength {
                bits: bit_count,
                bytes: available,
                needed,
            });
        }
        let payload = r.take(needed, "payload")?.to_vec();
        if r.pos != bytes.len() {
            return Err(ContainerError::TrailingBytes(bytes.len() - r.pos));
        }
        Ok(Self {
            version,
            kernel,
            flags,
            depth,
            width,
            height,
            table,
            side_channel,
            symbol_count,
            bit_count,
            payload,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: u64, section: &'static str) -> Result<&'a [u8], ContainerError> {
        let available = self.bytes.len() - self.pos;
        if n > available as u64 {
            return Err(ContainerError::Truncated {
                section,
                needed: n,
                available,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n as usize];
        self.pos += n as usize;
        Ok(s)
    }

    fn u8(&mut self, section: &'static str) -> Result<u8, ContainerError> {
        Ok(self.take(1, section)?[0])
    }

    fn u32(&mut self, section: &'static str) -> Result<u32, ContainerError> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().unwrap()))
    }

    fn u64(&mut self, section: &'static str) -> Result<u64, ContainerError> {
        Ok(u64::from_le_bytes(self.take(8, section)?.try_into().unwrap()))
    }
}
