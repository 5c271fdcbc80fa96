//! Canonical observer programs.
//!
//! `IDENT_1` copies one universe bit to the observation and halts by
//! running off its end:
//!
//! ```text
//! IN            cell0 := u
//! JZ            u = 0: skip to after the matching JNZ
//!   OUT1
//!   RIGHT       cell1 = 0
//! JNZ           falls through; cell0 still holds u = 1
//! LEFT          u = 1: back on cell0 (= 1); u = 0: on cell-1 (= 0)
//! FLIP          flag := (u = 0)
//! JZ
//!   OUT0
//!   FLIP
//! JNZ
//! ```
//!
//! Every path ends with all touched cells back at 0 and the head on a zero
//! cell, so `IDENT_n`, n copies of the gadget back to back, copies n bits.

use super::program::Program;

/// Bits of the single-bit copy gadget (11 opcodes, 33 bits).
pub const IDENT_1: &str = "111101001011110010100101000100110";

pub fn ident_1() -> Program {
    IDENT_1.parse().expect("gadget literal")
}

/// Observer copying the first `n` universe bits.
pub fn ident(n: usize) -> Program {
    IDENT_1.repeat(n).parse().expect("gadget literal")
}
