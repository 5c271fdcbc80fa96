//! Bijection between 4-tuples of rationals and the positive integers.
//!
//! Single rationals are enumerated by height h = |p| + q: stage 1 is 0/1;
//! stage h ≥ 2 lists, for each p in 1..h coprime to h in increasing order,
//! `p/(h-p)` then `-p/(h-p)`. A tuple's four per-coordinate indices are
//! combined with nested Cantor pairing, ⟨⟨x, y⟩, ⟨z, t⟩⟩ + 1, so
//! (0, 0, 0, 0) maps to 1.

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("{num}/{den} is not in lowest terms")]
    NotReduced { num: i64, den: u64 },
    #[error("rational indices start at 1")]
    ZeroIndex,
    #[error("index out of range")]
    Overflow,
}

/// A rational in lowest terms with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: u64,
}

impl Rational {
    pub fn new(num: i64, den: u64) -> Result<Self, RationalError> {
        if den == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        if num.unsigned_abs().gcd(&den) != 1 {
            return Err(RationalError::NotReduced { num, den });
        }
        Ok(Self { num, den })
    }

    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    fn height(&self) -> u64 {
        self.num.unsigned_abs() + self.den
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn totient(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// Number of rationals of height below `h`.
fn stage_offset(h: u64) -> u128 {
    if h <= 1 {
        return 0;
    }
    1 + (2..h).map(|j| 2 * u128::from(totient(j))).sum::<u128>()
}

fn rational_to_nat(r: Rational) -> u128 {
    let h = r.height();
    if h == 1 {
        return 0;
    }
    let p = r.num.unsigned_abs();
    let rank = (1..p).filter(|k| k.gcd(&h) == 1).count() as u128;
    stage_offset(h) + 2 * rank + u128::from(r.num < 0)
}

fn nat_to_rational(n: u128) -> Rational {
    if n == 0 {
        return Rational::zero();
    }
    let mut h = 2u64;
    let mut offset = 1u128;
    loop {
        let size = 2 * u128::from(totient(h));
        if n < offset + size {
            break;
        }
        offset += size;
        h += 1;
    }
    let within = n - offset;
    let rank = (within / 2) as usize;
    let p = (1..h)
        .filter(|k| k.gcd(&h) == 1)
        .nth(rank)
        .expect("rank within stage");
    let num = p as i64;
    Rational {
        num: if within % 2 == 1 { -num } else { num },
        den: h - p,
    }
}

fn pair(a: u128, b: u128) -> Option<u128> {
    let s = a.checked_add(b)?;
    s.checked_mul(s + 1)?.checked_div(2)?.checked_add(b)
}

fn unpair(z: u128) -> (u128, u128) {
    let mut w = (((8.0 * z as f64 + 1.0).sqrt() - 1.0) / 2.0) as u128;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let b = z - w * (w + 1) / 2;
    (w - b, b)
}

/// Position of the point (x, y, z, t), starting at 1.
pub fn rational_index(point: &[Rational; 4]) -> Result<u64, RationalError> {
    for r in point {
        Rational::new(r.num, r.den)?;
    }
    let n = point.map(rational_to_nat);
    let i = pair(pair(n[0], n[1]).ok_or(RationalError::Overflow)?, pair(n[2], n[3]).ok_or(RationalError::Overflow)?)
        .ok_or(RationalError::Overflow)?;
    u64::try_from(i + 1).map_err(|_| RationalError::Overflow)
}

/// Inverse of [`rational_index`].
pub fn index_rational(i: u64) -> Result<[Rational; 4], RationalError> {
    if i == 0 {
        return Err(RationalError::ZeroIndex);
    }
    let (a, b) = unpair(u128::from(i - 1));
    let (x, y) = unpair(a);
    let (z, t) = unpair(b);
    Ok([x, y, z, t].map(nat_to_rational))
}
