//! Canonical Huffman coding of pair symbols, MSB-first bit packing.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::delcore::Deldensity2D;

pub type Symbol = (i32, i32);

/// Longest code length accepted by the parser.
pub const MAX_CODE_LENGTH: u8 = 63;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HuffmanError {
    #[error("cannot build a code for an empty density")]
    EmptyDensity,
    #[error("symbol {0:?} is not in the code table")]
    UnknownSymbol(Symbol),
    #[error("bitstream ended after {decoded} of {expected} symbols")]
    Truncated { decoded: u64, expected: u64 },
    #[error("bitstream holds a codeword that is not in the table")]
    InvalidCodeword,
    #[error("code lengths violate the Kraft inequality")]
    KraftViolation,
    #[error("code length {0} exceeds the supported maximum")]
    CodeLengthTooLarge(u8),
    #[error("zero code length in a table with more than one symbol")]
    ZeroLength,
    #[error("single-symbol table must use code length 0, got {0}")]
    SingletonLength(u8),
    #[error("symbol {0:?} appears twice in the table")]
    DuplicateSymbol(Symbol),
    #[error("code table is empty")]
    EmptyTable,
    #[error("bit count {bits} does not fit in {bytes} payload bytes")]
    BitCount { bits: u64, bytes: usize },
    #[error("{0} unread bits remain after the last symbol")]
    TrailingBits(u64),
}

/// MSB-first bit sink.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `len` bits of `code`, most significant first.
    pub fn write(&mut self, code: u64, len: u8) {
        for i in (0..len).rev() {
            let bit = (code >> i) & 1;
            let offset = (self.bits % 8) as u8;
            if offset == 0 {
                self.bytes.push(0);
            }
            if bit == 1 {
                *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
            }
            self.bits += 1;
        }
    }

    pub fn bit_count(&self) -> u64 {
        self.bits
    }

    /// Zero-padded bytes and the number of meaningful bits.
    pub fn finish(self) -> (Vec<u8>, u64) {
        (self.bytes, self.bits)
    }
}

/// MSB-first bit source bounded by an explicit bit count.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    limit: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], bits: u64) -> Result<Self, HuffmanError> {
        if bits > bytes.len() as u64 * 8 {
            return Err(HuffmanError::BitCount {
                bits,
                bytes: bytes.len(),
            });
        }
        Ok(Self {
            bytes,
            limit: bits,
            pos: 0,
        })
    }

    pub fn read_bit(&mut self) -> Option<u8> {
        if self.pos >= self.limit {
            return None;
        }
        let byte = self.bytes[(self.pos / 8) as usize];
        let bit = (byte >> (7 - (self.pos % 8))) & 1;
        self.pos += 1;
        Some(bit)
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.pos
    }
}

/// Canonical prefix code over pair symbols.
///
/// Entries are kept in canonical order: by code length, then by symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    entries: Vec<(Symbol, u8)>,
    codes: Vec<u64>,
}

impl HuffmanTable {
    /// Builds a table from explicit code lengths, validating them.
    pub fn from_lengths(lengths: &[(Symbol, u8)]) -> Result<Self, HuffmanError> {
        if lengths.is_empty() {
            return Err(HuffmanError::EmptyTable);
        }
        let mut entries = lengths.to_vec();
        entries.sort_unstable_by_key(|&(s, l)| (l, s));
        let mut seen: Vec<Symbol> = entries.iter().map(|e| e.0).collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(HuffmanError::DuplicateSymbol(w[0]));
        }
        if entries.len() == 1 {
            if entries[0].1 != 0 {
                return Err(HuffmanError::SingletonLength(entries[0].1));
            }
            return Ok(Self {
                entries,
                codes: vec![0],
            });
        }
        let mut kraft: u128 = 0;
        for &(_, len) in &entries {
            if len == 0 {
                return Err(HuffmanError::ZeroLength);
            }
            if len > MAX_CODE_LENGTH {
                return Err(HuffmanError::CodeLengthTooLarge(len));
            }
            kraft += 1u128 << (MAX_CODE_LENGTH - len);
        }
        if kraft > 1u128 << MAX_CODE_LENGTH {
            return Err(HuffmanError::KraftViolation);
        }
        let mut codes = Vec::with_capacity(entries.len());
        let mut code: u64 = 0;
        let mut prev_len = entries[0].1;
        for (i, &(_, len)) in entries.iter().enumerate() {
            if i > 0 {
                code = (code + 1) << (len - prev_len);
            }
            prev_len = len;
            codes.push(code);
        }
        Ok(Self { entries, codes })
    }

    /// `(symbol, code length)` in canonical order.
    pub fn entries(&self) -> &[(Symbol, u8)] {
        &self.entries
    }

    /// Codewords aligned with [`entries`](Self::entries).
    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn code_length(&self, symbol: Symbol) -> Option<u8> {
        self.entries.iter().find(|e| e.0 == symbol).map(|e| e.1)
    }

    /// `sum 2^-len`, exactly 1 for a complete code.
    pub fn kraft_sum(&self) -> f64 {
        if self.entries.len() == 1 {
            return 1.0;
        }
        self.entries.iter().map(|&(_, l)| (-f64::from(l)).exp2()).sum()
    }

    /// Mean code length under the given histogram.
    pub fn mean_length(&self, density: &Deldensity2D) -> f64 {
        let lengths: HashMap<Symbol, u8> = self.entries.iter().copied().collect();
        let bits: u64 = density
            .bins()
            .iter()
            .map(|(s, c)| u64::from(lengths.get(s).copied().unwrap_or(0)) * c)
            .sum();
        bits as f64 / density.total() as f64
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Node {
    weight: u64,
    // smallest leaf index below this node; breaks weight ties deterministically
    order: usize,
    id: usize,
}

/// Huffman code lengths for the histogram, in canonical form.
pub fn huffman_build(density: &Deldensity2D) -> Result<HuffmanTable, HuffmanError> {
    let bins = density.bins();
    if bins.is_empty() {
        return Err(HuffmanError::EmptyDensity);
    }
    if bins.len() == 1 {
        return HuffmanTable::from_lengths(&[(bins[0].0, 0)]);
    }
    let leaves = bins.len();
    let mut parent = vec![usize::MAX; 2 * leaves - 1];
    let mut heap = BinaryHeap::with_capacity(leaves);
    for (i, (_, c)) in bins.iter().enumerate() {
        heap.push(Reverse(Node {
            weight: *c,
            order: i,
            id: i,
        }));
    }
    let mut next = leaves;
    while heap.len() > 1 {
        let Reverse(a) = heap.pop().unwrap();
        let Reverse(b) = heap.pop().unwrap();
        parent[a.id] = next;
        parent[b.id] = next;
        heap.push(Reverse(Node {
            weight: a.weight + b.weight,
            order: a.order.min(b.order),
            id: next,
        }));
        next += 1;
    }
    let root = next - 1;
    let mut depth = vec![0u8; 2 * leaves - 1];
    for id in (0..root).rev() {
        depth[id] = depth[parent[id]] + 1;
    }
    let lengths: Vec<(Symbol, u8)> = bins
        .iter()
        .enumerate()
        .map(|(i, (s, _))| (*s, depth[i]))
        .collect();
    HuffmanTable::from_lengths(&lengths)
}

/// Packs the symbols; returns the padded bytes and the exact bit count.
pub fn huffman_encode(symbols: &[Symbol], table: &HuffmanTable) -> Result<(Vec<u8>, u64), HuffmanError> {
    let lookup: HashMap<Symbol, (u64, u8)> = table
        .entries
        .iter()
        .zip(&table.codes)
        .map(|(&(s, l), &c)| (s, (c, l)))
        .collect();
    let mut writer = BitWriter::new();
    for s in symbols {
        let &(code, len) = lookup.get(s).ok_or(HuffmanError::UnknownSymbol(*s))?;
        writer.write(code, len);
    }
    Ok(writer.finish())
}

/// Decodes exactly `count` symbols from the first `bits` bits of `bytes`.
pub fn huffman_decode(
    bytes: &[u8],
    bits: u64,
    table: &HuffmanTable,
    count: u64,
) -> Result<Vec<Symbol>, HuffmanError> {
    let mut reader = BitReader::new(bytes, bits)?;
    if table.entries.len() == 1 {
        if bits != 0 {
            return Err(HuffmanError::TrailingBits(bits));
        }
        return Ok(vec![table.entries[0].0; count as usize]);
    }
    // per length: first canonical code and index of its first entry
    let max_len = table.entries.last().map(|e| e.1).unwrap_or(0) as usize;
    let mut first_code = vec![0u64; max_len + 1];
    let mut first_index = vec![0usize; max_len + 1];
    let mut per_len = vec![0usize; max_len + 1];
    for (i, &(_, l)) in table.entries.iter().enumerate() {
        let l = l as usize;
        if per_len[l] == 0 {
            first_code[l] = table.codes[i];
            first_index[l] = i;
        }
        per_len[l] += 1;
    }
    let mut out = Vec::with_capacity(count.min(bits) as usize);
    for decoded in 0..count {
        let mut code = 0u64;
        let mut len = 0usize;
        loop {
            let bit = reader.read_bit().ok_or(HuffmanError::Truncated {
                decoded,
                expected: count,
            })?;
            code = (code << 1) | u64::from(bit);
            len += 1;
            if per_len[len] > 0 && code >= first_code[len] {
                let offset = (code - first_code[len]) as usize;
                if offset < per_len[len] {
                    out.push(table.entries[first_index[len] + offset].0);
                    break;
                }
            }
            if len == max_len {
                return Err(HuffmanError::InvalidCodeword);
            }
        }
    }
    if reader.remaining() != 0 {
        return Err(HuffmanError::TrailingBits(reader.remaining()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy1d::shannon_entropy;
    use proptest::prelude::*;

    fn density(counts: &[u64]) -> Deldensity2D {
        Deldensity2D::from_pairs(
            counts
                .iter()
                .enumerate()
                .flat_map(|(i, &c)| std::iter::repeat((i as i32, 0)).take(c as usize)),
        )
    }

    #[test]
    fn textbook_lengths() {
        let t = huffman_build(&density(&[2, 1, 1])).unwrap();
        assert_eq!(t.entries(), &[((0, 0), 1), ((1, 0), 2), ((2, 0), 2)]);
        assert_eq!(t.codes(), &[0b0, 0b10, 0b11]);
        assert_eq!(t.kraft_sum(), 1.0);
    }

    #[test]
    fn single_symbol_needs_no_bits() {
        let d = Deldensity2D::from_pairs(vec![(3, -4); 100]);
        let t = huffman_build(&d).unwrap();
        let (bytes, bits) = huffman_encode(&vec![(3, -4); 100], &t).unwrap();
        assert_eq!((bytes.len(), bits), (0, 0));
        assert_eq!(huffman_decode(&bytes, bits, &t, 100).unwrap(), vec![(3, -4); 100]);
    }

    #[test]
    fn table_validation() {
        assert_eq!(
            HuffmanTable::from_lengths(&[((0, 0), 1), ((1, 0), 1), ((2, 0), 1)]),
            Err(HuffmanError::KraftViolation)
        );
        assert_eq!(
            HuffmanTable::from_lengths(&[((0, 0), 1), ((0, 0), 1)]),
            Err(HuffmanError::DuplicateSymbol((0, 0)))
        );
        assert_eq!(
            HuffmanTable::from_lengths(&[((0, 0), 0), ((1, 0), 1)]),
            Err(HuffmanError::ZeroLength)
        );
        assert_eq!(
            HuffmanTable::from_lengths(&[((0, 0), 2)]),
            Err(HuffmanError::SingletonLength(2))
        );
        assert_eq!(
            HuffmanTable::from_lengths(&[((0, 0), 64), ((1, 0), 1)]),
            Err(HuffmanError::CodeLengthTooLarge(64))
        );
    }

    #[test]
    fn unknown_symbol_and_truncation() {
        let t = huffman_build(&density(&[3, 1])).unwrap();
        assert_eq!(
            huffman_encode(&[(9, 9)], &t),
            Err(HuffmanError::UnknownSymbol((9, 9)))
        );
        let (bytes, bits) = huffman_encode(&[(0, 0), (1, 0), (0, 0)], &t).unwrap();
        assert_eq!(bits, 3);
        assert!(matches!(
            huffman_decode(&bytes, bits, &t, 4),
            Err(HuffmanError::Truncated { decoded: 3, .. })
        ));
        assert!(matches!(
            huffman_decode(&bytes, 12, &t, 4),
            Err(HuffmanError::BitCount { .. })
        ));
    }

    #[test]
    fn incomplete_code_rejects_unused_codeword() {
        let t = HuffmanTable::from_lengths(&[((0, 0), 1), ((1, 0), 2)]).unwrap();
        assert_eq!(
            huffman_decode(&[0b1100_0000], 2, &t, 1),
            Err(HuffmanError::InvalidCodeword)
        );
    }

    #[test]
    fn msb_first_packing() {
        let mut w = BitWriter::new();
        w.write(0b101, 3);
        w.write(0b1, 1);
        w.write(0b11111, 5);
        let (bytes, bits) = w.finish();
        assert_eq!(bits, 9);
        assert_eq!(bytes, vec![0b1011_1111, 0b1000_0000]);
    }

    proptest! {
        #[test]
        fn roundtrip_and_rate(raw in proptest::collection::vec(0u8..16, 1..1000)) {
            let symbols: Vec<Symbol> = raw.iter().map(|&v| (i32::from(v) - 8, i32::from(v % 3))).collect();
            let d = Deldensity2D::from_pairs(symbols.iter().copied());
            let t = huffman_build(&d).unwrap();
            let (bytes, bits) = huffman_encode(&symbols, &t).unwrap();
            prop_assert_eq!(huffman_decode(&bytes, bits, &t, symbols.len() as u64).unwrap(), symbols.clone());
            prop_assert!(t.kraft_sum() <= 1.0 + 1e-12);
            let h = shannon_entropy(&d).unwrap();
            let mean = bits as f64 / symbols.len() as f64;
            prop_assert!((mean - t.mean_length(&d)).abs() < 1e-12);
            prop_assert!(mean >= h - 1e-9 && mean < h + 1.0, "h={} L={}", h, mean);
        }

        #[test]
        fn build_is_order_independent(raw in proptest::collection::vec(0u8..16, 2..300)) {
            let symbols: Vec<Symbol> = raw.iter().map(|&v| (i32::from(v), 0)).collect();
            let mut rev = symbols.clone();
            rev.reverse();
            let a = huffman_build(&Deldensity2D::from_pairs(symbols)).unwrap();
            let b = huffman_build(&Deldensity2D::from_pairs(rev)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
