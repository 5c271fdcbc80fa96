//! Finite bit strings with the textual `0`/`1` representation used in
//! configs, reports and tests.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit string {input:?}: character {ch:?} at offset {offset} is not 0 or 1")]
pub struct ParseBitsError {
    pub input: String,
    pub offset: usize,
    pub ch: char,
}

/// An ordered, possibly empty, sequence of bits.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// The `len` low bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        Self((0..len).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &[bool]) {
        self.0.extend_from_slice(other);
    }

    pub fn concat(&self, other: &[bool]) -> Self {
        let mut bits = self.0.clone();
        bits.extend_from_slice(other);
        Self(bits)
    }

    pub fn starts_with(&self, prefix: &[bool]) -> bool {
        self.0.starts_with(prefix)
    }

    pub fn prefix(&self, len: usize) -> Self {
        Self(self.0[..len.min(self.0.len())].to_vec())
    }

    /// Length-lexicographic comparison: shorter first, then lexicographic.
    pub fn cmp_length_lex(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }

    /// Value of the bits read as a big-endian integer (len ≤ 64).
    pub fn to_u64(&self) -> u64 {
        assert!(self.0.len() <= 64);
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }
}

impl Deref for BitString {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(offset, ch)| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitsError {
                    input: s.to_string(),
                    offset,
                    ch,
                }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a bit string literal, panicking on malformed input. Test and
/// gadget-table helper.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("malformed bit string literal")
}

/// Renders a bit slice as `0`/`1` text.
pub fn render(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
