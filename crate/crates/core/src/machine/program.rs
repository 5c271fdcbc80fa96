use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, ParseBitsError};

/// One decoded 3-bit instruction of the reference machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    Out0,
    Out1,
    Left,
    Right,
    Flip,
    Jz,
    Jnz,
    In,
}

impl Opcode {
    pub const ALL: [Opcode; 8] = [
        Opcode::Out0,
        Opcode::Out1,
        Opcode::Left,
        Opcode::Right,
        Opcode::Flip,
        Opcode::Jz,
        Opcode::Jnz,
        Opcode::In,
    ];

    pub fn from_code(code: u8) -> Opcode {
        Self::ALL[(code & 0b111) as usize]
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn decode(b0: bool, b1: bool, b2: bool) -> Opcode {
        Self::from_code(((b0 as u8) << 2) | ((b1 as u8) << 1) | b2 as u8)
    }

    pub fn bits(self) -> [bool; 3] {
        let c = self.code();
        [c & 4 != 0, c & 2 != 0, c & 1 != 0]
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Out0 => "OUT0",
            Opcode::Out1 => "OUT1",
            Opcode::Left => "LEFT",
            Opcode::Right => "RIGHT",
            Opcode::Flip => "FLIP",
            Opcode::Jz => "JZ",
            Opcode::Jnz => "JNZ",
            Opcode::In => "IN",
        }
    }
}

/// A program for the reference machine: a finite bit string, read as
/// consecutive 3-bit opcodes. Serves both as universe generator and as
/// observer.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Program(BitString);

impl Program {
    pub fn empty() -> Self {
        Self(BitString::new())
    }

    pub fn from_bits(bits: BitString) -> Self {
        Self(bits)
    }

    pub fn from_opcodes(ops: &[Opcode]) -> Self {
        Self(ops.iter().flat_map(|op| op.bits()).collect())
    }

    pub fn as_bits(&self) -> &BitString {
        &self.0
    }

    pub fn into_bits(self) -> BitString {
        self.0
    }

    /// Number of complete opcodes; trailing 1-2 bits do not form one.
    pub fn num_opcodes(&self) -> usize {
        self.0.len() / 3
    }

    /// Decodes opcode `i`. Callers must stay below `num_opcodes()`.
    #[inline]
    pub fn opcode(&self, i: usize) -> Opcode {
        let b = &self.0[3 * i..3 * i + 3];
        Opcode::decode(b[0], b[1], b[2])
    }

    pub fn opcodes(&self) -> impl Iterator<Item = Opcode> + '_ {
        (0..self.num_opcodes()).map(move |i| self.opcode(i))
    }

    /// Program at position `index` (0-based) of the length-lexicographic
    /// order ε, 0, 1, 00, 01, ...: the binary expansion of `index + 1`
    /// with its leading 1 removed.
    pub fn from_index(index: u64) -> Self {
        let n = index + 1;
        let len = 63 - n.leading_zeros() as usize;
        Self(BitString::from_u64(n, len))
    }

    /// Inverse of [`Program::from_index`]; `None` past 63 bits.
    pub fn index(&self) -> Option<u64> {
        if self.0.len() > 63 {
            return None;
        }
        Some(((1u64 << self.0.len()) | self.0.to_u64()) - 1)
    }

    pub fn concat(&self, suffix: &[bool]) -> Self {
        Self(self.0.concat(suffix))
    }

    pub fn cmp_length_lex(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp_length_lex(&other.0)
    }

    /// Space-separated mnemonics, with any trailing partial opcode bits.
    pub fn disassemble(&self) -> String {
        let mut parts: Vec<String> = self.opcodes().map(|op| op.mnemonic().to_string()).collect();
        let tail = self.0.len() % 3;
        if tail > 0 {
            parts.push(format!("[{}]", crate::bits::render(&self.0[self.0.len() - tail..])));
        }
        parts.join(" ")
    }
}

impl Deref for Program {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl From<BitString> for Program {
    fn from(bits: BitString) -> Self {
        Self(bits)
    }
}

impl FromStr for Program {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(Self)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Program({})", self.0)
    }
}
