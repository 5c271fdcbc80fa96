//! Model descriptions and the serialization that defines their length.
//!
//! Every description starts with a 3-bit tag:
//!
//! | tag | model | payload |
//! |-----|-------|---------|
//! | 000 | Coin | none |
//! | 001 | Bernoulli(a/b) | γ(a) γ(b), 0 < a < b |
//! | 010 | Markov order k | γ(k + 1), then per context c = 0..2^k: γ(num + 1) γ(den) of P(1 \| c) |
//! | 011 | M1 stream q | γ(\|q\| + 1) q |
//! | 100 | π stream | fixed 32-bit body [`PI_BODY`] |
//! | 101 | Champernowne stream | fixed 16-bit body [`CHAMPERNOWNE_BODY`] |
//! | 110 | identity observer | none |
//! | 111 | M1 observer s | γ(\|s\| + 1) s |
//!
//! The π and Champernowne generators are native; their fixed bodies stand
//! in for a program computing them, and make those models cost more than
//! the coin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::gamma::{gamma_encode, gamma_len, BitReader, GammaError};
use crate::bits::BitString;
use crate::machine::Program;

pub const TAG_BITS: u64 = 3;
/// Declared body of the π generator.
pub const PI_BODY: &str = "11001001000011111101101010100010";
/// Declared body of the Champernowne generator.
pub const CHAMPERNOWNE_BODY: &str = "1101110010111011";

const TAG_COIN: u8 = 0b000;
const TAG_BERNOULLI: u8 = 0b001;
const TAG_MARKOV: u8 = 0b010;
const TAG_M1_STREAM: u8 = 0b011;
const TAG_PI: u8 = 0b100;
const TAG_CHAMPERNOWNE: u8 = 0b101;
const TAG_IDENTITY: u8 = 0b110;
const TAG_M1_OBSERVER: u8 = 0b111;

/// Longest Markov order accepted.
pub const MAX_MARKOV_ORDER: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("Bernoulli parameter must satisfy 0 < {num} < {den}")]
    BadBernoulli { num: u64, den: u64 },
    #[error("probability {num}/{den} is not a reduced fraction in [0, 1]")]
    BadProbability { num: u64, den: u64 },
    #[error("Markov order {k} needs {expected} contexts, got {got}")]
    MarkovTable { k: u32, expected: usize, got: usize },
    #[error("Markov order {0} exceeds the supported maximum")]
    MarkovOrder(u32),
    #[error("truncated model description")]
    Truncated,
    #[error("tag {0:03b} does not describe this kind of model")]
    WrongTag(u8),
    #[error("declared stream body mismatch")]
    BadBody,
    #[error(transparent)]
    Gamma(#[from] GammaError),
}

/// An exact probability num/den in [0, 1], reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Prob {
    num: u64,
    den: u64,
}

impl Prob {
    pub fn new(num: u64, den: u64) -> Result<Self, ModelError> {
        use num_integer::Integer;
        if den == 0 || num > den || num.gcd(&den) != 1 {
            return Err(ModelError::BadProbability { num, den });
        }
        Ok(Self { num, den })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Source of a deterministic stream model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamSource {
    M1Program(Program),
    PiBits,
    ChampernowneBits,
}

/// A description of the universe distribution Q.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelExpr {
    Coin,
    Bernoulli { p_num: u64, p_den: u64 },
    /// Order-k Markov chain; `p_one[c]` is P(next = 1 | previous k bits = c),
    /// contexts read as big-endian numbers, history before the start taken
    /// as zeros.
    MarkovK { k: u32, p_one: Vec<Prob> },
    DetStream(StreamSource),
}

/// A description of the observation process S.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservationModel {
    Identity,
    M1Observer(Program),
}

impl ModelExpr {
    pub fn bernoulli(p_num: u64, p_den: u64) -> Result<Self, ModelError> {
        if p_num == 0 || p_num >= p_den {
            return Err(ModelError::BadBernoulli { num: p_num, den: p_den });
        }
        Ok(ModelExpr::Bernoulli { p_num, p_den })
    }

    pub fn markov(k: u32, p_one: Vec<Prob>) -> Result<Self, ModelError> {
        if k > MAX_MARKOV_ORDER {
            return Err(ModelError::MarkovOrder(k));
        }
        let expected = 1usize << k;
        if p_one.len() != expected {
            return Err(ModelError::MarkovTable {
                k,
                expected,
                got: p_one.len(),
            });
        }
        Ok(ModelExpr::MarkovK { k, p_one })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ModelExpr::Bernoulli { p_num, p_den } => Self::bernoulli(*p_num, *p_den).map(|_| ()),
            ModelExpr::MarkovK { k, p_one } => {
                for p in p_one {
                    Prob::new(p.num, p.den)?;
                }
                Self::markov(*k, p_one.clone()).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    pub fn encode(&self) -> BitString {
        let mut out = BitString::new();
        match self {
            ModelExpr::Coin => push_tag(&mut out, TAG_COIN),
            ModelExpr::Bernoulli { p_num, p_den } => {
                push_tag(&mut out, TAG_BERNOULLI);
                gamma_encode(*p_num, &mut out).expect("validated");
                gamma_encode(*p_den, &mut out).expect("validated");
            }
            ModelExpr::MarkovK { k, p_one } => {
                push_tag(&mut out, TAG_MARKOV);
                gamma_encode(u64::from(*k) + 1, &mut out).expect("positive");
                for p in p_one {
                    gamma_encode(p.num + 1, &mut out).expect("positive");
                    gamma_encode(p.den, &mut out).expect("validated");
                }
            }
            ModelExpr::DetStream(StreamSource::M1Program(q)) => {
                push_tag(&mut out, TAG_M1_STREAM);
                push_program(&mut out, q);
            }
            ModelExpr::DetStream(StreamSource::PiBits) => {
                push_tag(&mut out, TAG_PI);
                out.extend_from(&body(PI_BODY));
            }
            ModelExpr::DetStream(StreamSource::ChampernowneBits) => {
                push_tag(&mut out, TAG_CHAMPERNOWNE);
                out.extend_from(&body(CHAMPERNOWNE_BODY));
            }
        }
        out
    }

    /// Length of [`ModelExpr::encode`], computed from the table.
    pub fn code_length(&self) -> u64 {
        let g = |n: u64| gamma_len(n).expect("positive");
        TAG_BITS
            + match self {
                ModelExpr::Coin => 0,
                ModelExpr::Bernoulli { p_num, p_den } => g(*p_num) + g(*p_den),
                ModelExpr::MarkovK { k, p_one } => {
                    g(u64::from(*k) + 1) + p_one.iter().map(|p| g(p.num + 1) + g(p.den)).sum::<u64>()
                }
                ModelExpr::DetStream(StreamSource::M1Program(q)) => g(q.len() as u64 + 1) + q.len() as u64,
                ModelExpr::DetStream(StreamSource::PiBits) => PI_BODY.len() as u64,
                ModelExpr::DetStream(StreamSource::ChampernowneBits) => CHAMPERNOWNE_BODY.len() as u64,
            }
    }

    /// Decodes one description from the front of `bits`; returns it with
    /// the number of bits used.
    pub fn decode(bits: &[bool]) -> Result<(Self, usize), ModelError> {
        let mut r = BitReader::new(bits);
        let model = match read_tag(&mut r)? {
            TAG_COIN => ModelExpr::Coin,
            TAG_BERNOULLI => {
                let num = r.read_gamma()?;
                let den = r.read_gamma()?;
                Self::bernoulli(num, den)?
            }
            TAG_MARKOV => {
                let k = r.read_gamma()? - 1;
                if k > u64::from(MAX_MARKOV_ORDER) {
                    return Err(ModelError::MarkovOrder(k as u32));
                }
                let mut p_one = Vec::with_capacity(1 << k);
                for _ in 0..(1u64 << k) {
                    let num = r.read_gamma()? - 1;
                    let den = r.read_gamma()?;
                    p_one.push(Prob::new(num, den)?);
                }
                Self::markov(k as u32, p_one)?
            }
            TAG_M1_STREAM => ModelExpr::DetStream(StreamSource::M1Program(read_program(&mut r)?)),
            TAG_PI => {
                expect_body(&mut r, PI_BODY)?;
                ModelExpr::DetStream(StreamSource::PiBits)
            }
            TAG_CHAMPERNOWNE => {
                expect_body(&mut r, CHAMPERNOWNE_BODY)?;
                ModelExpr::DetStream(StreamSource::ChampernowneBits)
            }
            other => return Err(ModelError::WrongTag(other)),
        };
        Ok((model, r.position()))
    }
}

impl ObservationModel {
    pub fn encode(&self) -> BitString {
        let mut out = BitString::new();
        match self {
            ObservationModel::Identity => push_tag(&mut out, TAG_IDENTITY),
            ObservationModel::M1Observer(s) => {
                push_tag(&mut out, TAG_M1_OBSERVER);
                push_program(&mut out, s);
            }
        }
        out
    }

    pub fn code_length(&self) -> u64 {
        TAG_BITS
            + match self {
                ObservationModel::Identity => 0,
                ObservationModel::M1Observer(s) => gamma_len(s.len() as u64 + 1).expect("positive") + s.len() as u64,
            }
    }

    pub fn decode(bits: &[bool]) -> Result<(Self, usize), ModelError> {
        let mut r = BitReader::new(bits);
        let model = match read_tag(&mut r)? {
            TAG_IDENTITY => ObservationModel::Identity,
            TAG_M1_OBSERVER => ObservationModel::M1Observer(read_program(&mut r)?),
            other => return Err(ModelError::WrongTag(other)),
        };
        Ok((model, r.position()))
    }
}

/// Either kind of description, for uniform length accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Description<'a> {
    Model(&'a ModelExpr),
    Observer(&'a ObservationModel),
}

/// Length in bits of a model or observer description.
pub fn model_code_length(d: Description<'_>) -> u64 {
    match d {
        Description::Model(m) => m.code_length(),
        Description::Observer(s) => s.code_length(),
    }
}

fn body(s: &str) -> BitString {
    s.parse().expect("body literal")
}

fn push_tag(out: &mut BitString, tag: u8) {
    out.extend_from(&BitString::from_u64(u64::from(tag), 3));
}

fn push_program(out: &mut BitString, p: &Program) {
    gamma_encode(p.len() as u64 + 1, out).expect("positive");
    out.extend_from(p);
}

fn read_tag(r: &mut BitReader<'_>) -> Result<u8, ModelError> {
    let b = r.read_bits(3).ok_or(ModelError::Truncated)?;
    Ok(((b[0] as u8) << 2) | ((b[1] as u8) << 1) | b[2] as u8)
}

fn read_program(r: &mut BitReader<'_>) -> Result<Program, ModelError> {
    let len = r.read_gamma()? - 1;
    let bits = r.read_bits(len as usize).ok_or(ModelError::Truncated)?;
    Ok(Program::from_bits(bits.to_vec().into()))
}

fn expect_body(r: &mut BitReader<'_>, expected: &str) -> Result<(), ModelError> {
    let b = r.read_bits(expected.len()).ok_or(ModelError::Truncated)?;
    if b != body(expected).bits() {
        return Err(ModelError::BadBody);
    }
    Ok(())
}
