//! Binary snapshot of a universal stream prefix.
//!
//! Layout (integers little-endian):
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic `UTOE` |
//! | 1     | format version (1) |
//! | 1     | machine tag length m |
//! | m     | machine tag, ASCII |
//! | 8     | max_steps |
//! | 8     | max_output_bits |
//! | 8     | cell count n |
//! | ⌈n/4⌉ | cells, 2 bits each |
//!
//! Cell codes: `00` = 0, `01` = 1, `10` = `#`. Four cells per byte, the
//! first cell in the two most significant bits. Unused slots of the last
//! byte hold `11`.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::TriBit;
use crate::machine::{RunBudget, MACHINE_VERSION};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"UTOE";
const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a stream snapshot")]
    BadMagic,
    #[error("unsupported snapshot format version {0}")]
    Version(u8),
    #[error("invalid budget in header")]
    Budget,
    #[error("invalid cell code {code:#04b} at cell {index}")]
    BadCell { index: u64, code: u8 },
    #[error("invalid machine tag")]
    Tag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub machine: String,
    pub budget: RunBudget,
    pub cells: Vec<TriBit>,
}

fn code(c: TriBit) -> u8 {
    match c {
        TriBit::Zero => 0b00,
        TriBit::One => 0b01,
        TriBit::Undefined => 0b10,
    }
}

pub fn write_snapshot<W: Write>(mut w: W, budget: RunBudget, cells: &[TriBit]) -> io::Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&[FORMAT_VERSION, MACHINE_VERSION.len() as u8])?;
    w.write_all(MACHINE_VERSION.as_bytes())?;
    w.write_all(&budget.max_steps().to_le_bytes())?;
    w.write_all(&budget.max_output_bits().to_le_bytes())?;
    w.write_all(&(cells.len() as u64).to_le_bytes())?;
    for chunk in cells.chunks(4) {
        let mut byte = 0u8;
        for slot in 0..4 {
            let c = chunk.get(slot).map_or(0b11, |&c| code(c));
            byte |= c << (6 - 2 * slot);
        }
        w.write_all(&[byte])?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot, SnapshotError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let mut head = [0u8; 2];
    r.read_exact(&mut head)?;
    if head[0] != FORMAT_VERSION {
        return Err(SnapshotError::Version(head[0]));
    }
    let mut tag = vec![0u8; head[1] as usize];
    r.read_exact(&mut tag)?;
    let machine = String::from_utf8(tag).map_err(|_| SnapshotError::Tag)?;
    let steps = read_u64(&mut r)?;
    let out = read_u64(&mut r)?;
    let budget = RunBudget::new(steps, out).map_err(|_| SnapshotError::Budget)?;
    let n = read_u64(&mut r)?;
    let mut packed = vec![0u8; n.div_ceil(4) as usize];
    r.read_exact(&mut packed)?;
    let mut cells = Vec::with_capacity(n as usize);
    for index in 0..n {
        let byte = packed[(index / 4) as usize];
        let code = (byte >> (6 - 2 * (index % 4))) & 0b11;
        cells.push(match code {
            0b00 => TriBit::Zero,
            0b01 => TriBit::One,
            0b10 => TriBit::Undefined,
            _ => return Err(SnapshotError::BadCell { index, code }),
        });
    }
    Ok(Snapshot {
        machine,
        budget,
        cells,
    })
}
