//! Bit-exact bitstream primitives.
//!
//! [`BitString`] is an append-only bit sequence packed MSB-first within each
//! byte; [`BitReader`] consumes one sequentially. Prefix-free segments written
//! back to back decode left to right with no padding between them.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("unexpected end of stream at bit {0}")]
    UnexpectedEndOfStream(usize),
}

/// Growable bit sequence; bit 0 of the stream is the MSB of byte 0.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let slot = self.len % 8;
        if slot == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << (7 - slot);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        for k in (0..width).rev() {
            self.push((value >> k) & 1 == 1);
        }
    }

    /// `push_bits` with 128-bit headroom for very wide fixed-length fields.
    pub fn push_bits_wide(&mut self, value: u128, width: u32) {
        debug_assert!(width <= 128);
        for k in (0..width).rev() {
            self.push((value >> k) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &BitString) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    /// `"0"`/`"1"` rendering, mainly for tests and traces.
    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bits(s: &str) -> Self {
        let mut b = BitString::new();
        for c in s.chars() {
            match c {
                '0' => b.push(false),
                '1' => b.push(true),
                _ => panic!("not a bit: {c:?}"),
            }
        }
        b
    }
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString({})", self.to_bit_string())
    }
}

/// Sequential reader over a [`BitString`].
pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a BitString) -> Self {
        BitReader { bits, pos: 0 }
    }

    #[inline]
    pub fn position(&self) -> usize {
        self.pos
    }

    #[inline]
    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool, BitsError> {
        if self.pos >= self.bits.len() {
            return Err(BitsError::UnexpectedEndOfStream(self.pos));
        }
        let b = self.bits.get(self.pos);
        self.pos += 1;
        Ok(b)
    }

    /// Reads `width` bits MSB-first.
    pub fn read_bits(&mut self, width: u32) -> Result<u64, BitsError> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    /// `read_bits` with 128-bit headroom.
    pub fn read_bits_wide(&mut self, width: u32) -> Result<u128, BitsError> {
        let mut v = 0u128;
        for _ in 0..width {
            v = (v << 1) | u128::from(self.read_bit()?);
        }
        Ok(v)
    }
}
