//! Bit words: fixed-length sequences over {0,1}.
//!
//! Words are indexed big-endian: the first bit is the most significant, so
//! the word `01` on two bits corresponds to table index 1. All probability
//! tables in this crate use that indexing.

use std::fmt;

use crate::error::{Error, Result};

/// A sequence of bits. Messages, codewords, pads and ciphertext payloads are
/// all `BitWord`s; only the degenerate single-support code table produces an
/// empty one (the empty codeword).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    bits: Vec<bool>,
}

impl BitWord {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Word of `len` bits equal to the big-endian binary expansion of `index`.
    pub fn from_index(index: usize, len: usize) -> Self {
        assert!(len >= usize::BITS as usize || index < (1usize << len));
        let bits = (0..len).map(|i| (index >> (len - 1 - i)) & 1 == 1).collect();
        Self { bits }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "invalid bit character {c:?} in {s:?}"
                    )))
                }
            }
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Big-endian integer value; only valid for words short enough to index
    /// a table (guarded call sites).
    pub fn to_index(&self) -> usize {
        assert!(self.len() < usize::BITS as usize, "word too long to index");
        self.bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
    }

    /// True if `self` equals the first `self.len()` bits of `other`.
    pub fn is_prefix_of(&self, other: &BitWord) -> bool {
        self.len() <= other.len() && self.bits == other.bits[..self.len()]
    }

    pub fn xor(&self, other: &BitWord) -> Result<BitWord> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(BitWord::new(
            self.bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a ^ b)
                .collect(),
        ))
    }

    /// Packs the bits MSB-first into bytes, zero-padding the final byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes) given the bit count.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::InvalidParameter(format!(
                "expected {} bytes for {} bits, got {}",
                len.div_ceil(8),
                len,
                bytes.len()
            )));
        }
        let bits = (0..len)
            .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
            .collect();
        Ok(Self { bits })
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}
