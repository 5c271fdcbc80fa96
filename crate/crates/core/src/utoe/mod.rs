//! The universal generator: every program's output, dovetailed into one
//! stream.
//!
//! Row `r` (1-based) of the matrix is the program at length-lex index
//! `r - 1` (ε, 0, 1, 00, ...); column `k` is its k-th output bit. Cells are
//! linearized along anti-diagonals `d = r + k - 1`. Diagonal d starts
//! after T(d-1) = d(d-1)/2 cells; odd diagonals run from (row 1, col d)
//! down to (row d, col 1), even diagonals run back up.

mod rational;
mod snapshot;
mod wrap;

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{run_generator, GeneratorRun, LiveGenerator, Program, RunBudget, StepMeter, UniverseSource};

pub use rational::{index_rational, rational_index, Rational, RationalError};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotError, SNAPSHOT_MAGIC};
pub use wrap::{run_wrapped, run_wrapped_on_snapshot, wrap_observer, WrapError, WrappedObserver, EXTRACTOR_TAG};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UtoeError {
    #[error("cell indices start at 1")]
    ZeroIndex,
    #[error("cell columns start at 1")]
    ZeroColumn,
    #[error("cell index out of range")]
    Overflow,
}

/// A (program, position) coordinate of the universal matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub q: Program,
    /// 1-based output position.
    pub k: u64,
}

impl Cell {
    pub fn new(q: Program, k: u64) -> Result<Self, UtoeError> {
        if k == 0 {
            return Err(UtoeError::ZeroColumn);
        }
        Ok(Self { q, k })
    }
}

/// Contents of one cell: a written bit, or `#` for never written within
/// budget. Written cells are never rewritten.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TriBit {
    Zero,
    One,
    Undefined,
}

impl TriBit {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            TriBit::One
        } else {
            TriBit::Zero
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            TriBit::Zero => Some(false),
            TriBit::One => Some(true),
            TriBit::Undefined => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            TriBit::Zero => '0',
            TriBit::One => '1',
            TriBit::Undefined => '#',
        }
    }
}

impl fmt::Display for TriBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Renders cells as a `0`/`1`/`#` string.
pub fn render_tribits(cells: &[TriBit]) -> String {
    cells.iter().map(|c| c.symbol()).collect()
}

fn triangle(m: u128) -> u128 {
    m * (m + 1) / 2
}

/// ⟨q, k⟩: position of `cell` in the serpentine order, starting at 1.
pub fn cell_index(cell: &Cell) -> Result<u64, UtoeError> {
    if cell.k == 0 {
        return Err(UtoeError::ZeroColumn);
    }
    let row = u128::from(cell.q.index().ok_or(UtoeError::Overflow)?) + 1;
    let d = row + u128::from(cell.k) - 1;
    let offset = if d % 2 == 1 { row } else { d - row + 1 };
    let i = triangle(d - 1) + offset;
    u64::try_from(i).map_err(|_| UtoeError::Overflow)
}

/// Inverse of [`cell_index`].
pub fn index_cell(i: u64) -> Result<Cell, UtoeError> {
    if i == 0 {
        return Err(UtoeError::ZeroIndex);
    }
    let i = u128::from(i);
    // Smallest d with T(d) >= i.
    let mut d = ((((8 * i + 1) as f64).sqrt() - 1.0) / 2.0) as u128;
    while triangle(d) < i {
        d += 1;
    }
    while d > 1 && triangle(d - 1) >= i {
        d -= 1;
    }
    let pos = i - triangle(d - 1);
    let row = if d % 2 == 1 { pos } else { d - pos + 1 };
    let k = d - row + 1;
    Ok(Cell {
        q: Program::from_index((row - 1) as u64),
        k: k as u64,
    })
}

fn cell_value(run: &GeneratorRun, k: u64) -> TriBit {
    run.output
        .get(k as usize - 1)
        .map_or(TriBit::Undefined, |&b| TriBit::from_bit(b))
}

/// Bits k = 1..n of `q`'s universe, `#` past what the run emits.
pub fn extract_universe(q: &Program, n: usize, budget: RunBudget) -> Vec<TriBit> {
    let run = run_generator(q, budget);
    (1..=n as u64).map(|k| cell_value(&run, k)).collect()
}

/// The first `n` cells of the universal stream. Every row is run
/// independently under `budget`.
pub fn utoe_stream(n: u64, budget: RunBudget) -> Vec<TriBit> {
    let cells: Vec<Cell> = (1..=n).map(|i| index_cell(i).expect("positive index")).collect();
    let max_row = cells.iter().map(|c| c.q.index().unwrap()).max().unwrap_or(0);
    let runs: Vec<GeneratorRun> = (0..=max_row)
        .map(|r| run_generator(&Program::from_index(r), budget))
        .collect();
    cells
        .iter()
        .map(|c| cell_value(&runs[c.q.index().unwrap() as usize], c.k))
        .collect()
}

/// Same cells as [`utoe_stream`], rows and cells computed in parallel.
pub fn utoe_stream_par(n: u64, budget: RunBudget) -> Vec<TriBit> {
    let max_row = (1..=n)
        .into_par_iter()
        .map(|i| index_cell(i).unwrap().q.index().unwrap())
        .max()
        .unwrap_or(0);
    let runs: Vec<GeneratorRun> = (0..=max_row)
        .into_par_iter()
        .map(|r| run_generator(&Program::from_index(r), budget))
        .collect();
    (1..=n)
        .into_par_iter()
        .map(|i| {
            let c = index_cell(i).unwrap();
            cell_value(&runs[c.q.index().unwrap() as usize], c.k)
        })
        .collect()
}

/// The universal stream computed on demand: each row is a live generator
/// resumed only as far as some read requires, all sharing one step meter.
#[derive(Debug)]
pub struct LazyUtoe {
    budget: RunBudget,
    rows: HashMap<u64, LiveGenerator>,
}

impl LazyUtoe {
    pub fn new(budget: RunBudget) -> Self {
        Self {
            budget,
            rows: HashMap::new(),
        }
    }

    /// Cell `i` of the stream, advancing its row's generator as needed.
    pub fn cell(&mut self, i: u64, meter: &mut StepMeter) -> Result<TriBit, UtoeError> {
        let cell = index_cell(i)?;
        let row = cell.q.index().expect("rows from index_cell are indexable");
        let budget = self.budget;
        let gen = self
            .rows
            .entry(row)
            .or_insert_with(|| LiveGenerator::new(cell.q.clone(), budget));
        Ok(gen
            .bit(cell.k as usize - 1, meter)
            .map_or(TriBit::Undefined, TriBit::from_bit))
    }
}

/// The universe of one program read back out of the universal stream by
/// index arithmetic: bit k of `q` is cell ⟨q, k⟩.
pub struct ExtractedRow<'a> {
    pub stream: &'a mut LazyUtoe,
    pub q: Program,
}

impl UniverseSource for ExtractedRow<'_> {
    fn bit(&mut self, index: usize, meter: &mut StepMeter) -> Option<bool> {
        let cell = Cell::new(self.q.clone(), index as u64 + 1).ok()?;
        let i = cell_index(&cell).ok()?;
        self.stream.cell(i, meter).ok()?.bit()
    }
}
