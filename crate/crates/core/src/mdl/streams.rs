//! Built-in deterministic bit streams.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bits::BitString;

const GUARD_BITS: usize = 64;

/// arctan(1/x) scaled by 2^scale_bits, truncated.
fn arctan_inv(x: u32, scale_bits: usize) -> BigUint {
    let one = BigUint::one() << scale_bits;
    let x2 = BigUint::from(x) * x;
    let mut power = one / x; // 1 / x^(2k+1), scaled
    let mut sum = BigUint::zero();
    let mut neg = BigUint::zero();
    let mut k = 0u32;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            neg += term;
        }
        power /= &x2;
        k += 1;
    }
    sum - neg
}

/// The first `n` bits of the binary expansion of π, integer part
/// included: 11.001001000011111101101010100010...
pub fn pi_bits(n: usize) -> BitString {
    if n == 0 {
        return BitString::new();
    }
    // π = 16 arctan(1/5) - 4 arctan(1/239); keep n - 2 fraction bits.
    let scale = n + GUARD_BITS;
    let pi = arctan_inv(5, scale) * 16u32 - arctan_inv(239, scale) * 4u32;
    let truncated = pi >> (GUARD_BITS + 2);
    let digits: Vec<bool> = (0..n as u64).rev().map(|i| truncated.bit(i)).collect();
    BitString::from_bits(digits)
}

/// The first `n` bits of 1 10 11 100 101 ..., the binary numerals of
/// 1, 2, 3, ... concatenated.
pub fn champernowne_bits(n: usize) -> BitString {
    let mut out = Vec::with_capacity(n);
    let mut k = 1u64;
    while out.len() < n {
        let width = 64 - k.leading_zeros();
        for i in (0..width).rev() {
            if out.len() == n {
                break;
            }
            out.push((k >> i) & 1 == 1);
        }
        k += 1;
    }
    BitString::from_bits(out)
}
