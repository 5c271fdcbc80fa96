//! Elias gamma code: floor(log2 n) zeros, then n in binary.

use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GammaError {
    #[error("Elias gamma codes positive integers only")]
    Zero,
    #[error("truncated gamma codeword at bit {0}")]
    Truncated(usize),
    #[error("gamma codeword at bit {0} exceeds 64 bits")]
    Overflow(usize),
}

/// Codeword length 2*floor(log2 n) + 1.
pub fn gamma_len(n: u64) -> Result<u64, GammaError> {
    if n == 0 {
        return Err(GammaError::Zero);
    }
    Ok(2 * u64::from(63 - n.leading_zeros()) + 1)
}

pub fn gamma_encode(n: u64, out: &mut BitString) -> Result<(), GammaError> {
    if n == 0 {
        return Err(GammaError::Zero);
    }
    let width = 64 - n.leading_zeros() as usize;
    for _ in 1..width {
        out.push(false);
    }
    for i in (0..width).rev() {
        out.push((n >> i) & 1 == 1);
    }
    Ok(())
}

/// Codeword for `n` and its length.
pub fn elias_gamma(n: u64) -> Result<BitString, GammaError> {
    let mut out = BitString::new();
    gamma_encode(n, &mut out)?;
    Ok(out)
}

/// Sequential reader over a bit slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        Self { bits, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Option<bool> {
        let b = self.bits.get(self.pos).copied()?;
        self.pos += 1;
        Some(b)
    }

    pub fn read_bits(&mut self, n: usize) -> Option<&'a [bool]> {
        if self.remaining() < n {
            return None;
        }
        let s = &self.bits[self.pos..self.pos + n];
        self.pos += n;
        Some(s)
    }

    pub fn read_gamma(&mut self) -> Result<u64, GammaError> {
        let start = self.pos;
        let mut zeros = 0usize;
        loop {
            match self.read_bit() {
                Some(false) => zeros += 1,
                Some(true) => break,
                None => return Err(GammaError::Truncated(start)),
            }
        }
        if zeros >= 64 {
            return Err(GammaError::Overflow(start));
        }
        let mut n = 1u64;
        for _ in 0..zeros {
            let b = self.read_bit().ok_or(GammaError::Truncated(start))?;
            n = (n << 1) | b as u64;
        }
        Ok(n)
    }
}
