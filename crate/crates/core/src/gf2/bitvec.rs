//! Packed bit vectors over GF(2).
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Bits at positions
//! `>= len` inside the last word are always zero, so word-wise equality and
//! zero tests are exact.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn new() -> Self {
        BitVec::default()
    }

    /// Builds a vector from individual bits, first element at position 0.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = BitVec::new();
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Encodes `value` in `len` bits, least significant bit at position 0.
    ///
    /// Fails if `value` needs more than `len` bits.
    pub fn from_uint(value: u64, len: usize) -> Result<Self> {
        if len < WORD && (value >> len) != 0 {
            return Err(Error::Overflow { value, bits: len });
        }
        let mut v = BitVec::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.mask_tail();
        }
        Ok(v)
    }

    /// Inverse of [`BitVec::from_uint`]. Returns `None` if any bit at
    /// position 64 or above is set.
    pub fn to_uint(&self) -> Option<u64> {
        if self.words.iter().skip(1).any(|&w| w != 0) {
            return None;
        }
        Some(self.words.first().copied().unwrap_or(0))
    }

    /// Builds a vector from raw words (bit `i` of word `w` is position `64w + i`).
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVec { words, len };
        v.mask_tail();
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Position of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// `self ^= other`. Both vectors must have the same length.
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(
            self.len, other.len,
            "xor of bit vectors with different lengths"
        );
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the bitwise AND, i.e. the GF(2) inner product.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of bit vectors with different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// 64 bits starting at `bit`; positions past the end read as zero.
    #[inline]
    fn word_at(&self, bit: usize) -> u64 {
        let w = bit / WORD;
        let o = bit % WORD;
        let lo = self.words.get(w).copied().unwrap_or(0) >> o;
        if o == 0 {
            lo
        } else {
            lo | (self.words.get(w + 1).copied().unwrap_or(0) << (WORD - o))
        }
    }

    /// Copies bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(
            start + len <= self.len,
            "slice {start}..{} out of range for length {}",
            start + len,
            self.len
        );
        let words = (0..words_for(len))
            .map(|i| self.word_at(start + i * WORD))
            .collect();
        BitVec::from_words(words, len)
    }

    /// Appends all bits of `other`.
    pub fn extend_from(&mut self, other: &BitVec) {
        let offset = self.len;
        let new_len = self.len + other.len;
        self.words.resize(words_for(new_len), 0);
        let o = offset % WORD;
        let base = offset / WORD;
        for (i, &w) in other.words.iter().enumerate() {
            self.words[base + i] |= w << o;
            if o != 0 && base + i + 1 < self.words.len() {
                self.words[base + i + 1] |= w >> (WORD - o);
            }
        }
        self.len = new_len;
    }

    /// Appends `n` zero bits.
    pub fn pad_zeros(&mut self, n: usize) {
        self.len += n;
        self.words.resize(words_for(self.len), 0);
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a BitVec>>(parts: I) -> BitVec {
        let mut out = BitVec::new();
        for p in parts {
            out.extend_from(p);
        }
        out
    }

    /// Splits into consecutive pieces of `piece_len` bits. The length must be
    /// a multiple of `piece_len`.
    pub fn chunks(&self, piece_len: usize) -> Vec<BitVec> {
        assert!(piece_len > 0 && self.len.is_multiple_of(piece_len));
        (0..self.len / piece_len)
            .map(|i| self.slice(i * piece_len, piece_len))
            .collect()
    }

    /// Little-endian byte packing: byte `j` holds bits `8j..8j+8`, bit `8j+t`
    /// at weight `1 << t`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for j in 0..nbytes {
            out.push((self.words[j / 8] >> ((j % 8) * 8)) as u8);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<BitVec> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Malformed(format!(
                "{} bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        let mut words = vec![0u64; words_for(len)];
        for (j, &b) in bytes.iter().enumerate() {
            words[j / 8] |= (b as u64) << ((j % 8) * 8);
        }
        let v = BitVec { words, len };
        let mut masked = v.clone();
        masked.mask_tail();
        if masked != v {
            return Err(Error::Malformed(format!(
                "nonzero bits past declared length {len}"
            )));
        }
        Ok(v)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str, len: usize) -> Result<BitVec> {
        let bytes = hex::decode(s).map_err(|e| Error::Malformed(format!("bad hex: {e}")))?;
        BitVec::from_bytes(&bytes, len)
    }

    fn mask_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[{}](", self.len)?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

#[derive(Serialize, Deserialize)]
struct BitVecRepr {
    len: usize,
    hex: String,
}

impl Serialize for BitVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BitVecRepr {
            len: self.len,
            hex: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = BitVecRepr::deserialize(d)?;
        BitVec::from_hex(&repr.hex, repr.len).map_err(serde::de::Error::custom)
    }
}
