//! Observers that read their universe out of the universal stream.
//!
//! A wrapped observer serializes as
//! `EXTRACTOR_TAG · γ(|q| + 1) · q · s`: a fixed 8-bit marker standing for
//! the native extractor, the generator it localizes (length-prefixed so the
//! boundary with `s` is decodable), and the original observer.

use thiserror::Error;

use super::{cell_index, Cell, ExtractedRow, LazyUtoe, TriBit};
use crate::bits::BitString;
use crate::machine::{ObserverRun, ObserverState, Program, RunBudget, StepMeter, UniverseSource};
use crate::mdl::gamma::{gamma_encode, gamma_len, BitReader, GammaError};

/// Marker for the extractor; its length is the constant overhead c_r.
pub const EXTRACTOR_TAG: &str = "10110111";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WrapError {
    #[error("missing or wrong extractor tag")]
    BadTag,
    #[error("bad generator length prefix: {0}")]
    Length(#[from] GammaError),
    #[error("embedded generator truncated")]
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrappedObserver {
    pub extractor_tag: BitString,
    pub embedded_q: Program,
    pub embedded_s: Program,
    pub declared_length: u64,
}

fn extractor_tag() -> BitString {
    EXTRACTOR_TAG.parse().expect("tag literal")
}

pub fn wrap_observer(q: &Program, s: &Program) -> WrappedObserver {
    let c_r = EXTRACTOR_TAG.len() as u64;
    let prefix = gamma_len(q.len() as u64 + 1).expect("positive");
    WrappedObserver {
        extractor_tag: extractor_tag(),
        embedded_q: q.clone(),
        embedded_s: s.clone(),
        declared_length: c_r + prefix + q.len() as u64 + s.len() as u64,
    }
}

impl WrappedObserver {
    /// Extra length over the plain pair: c_r + |γ(|q| + 1)|.
    pub fn overhead(&self) -> u64 {
        self.declared_length - self.embedded_q.len() as u64 - self.embedded_s.len() as u64
    }

    pub fn to_bits(&self) -> BitString {
        let mut out = self.extractor_tag.clone();
        gamma_encode(self.embedded_q.len() as u64 + 1, &mut out).expect("positive");
        out.extend_from(&self.embedded_q);
        out.extend_from(&self.embedded_s);
        out
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self, WrapError> {
        let mut r = BitReader::new(bits);
        let tag = r.read_bits(EXTRACTOR_TAG.len()).ok_or(WrapError::BadTag)?;
        if tag != extractor_tag().bits() {
            return Err(WrapError::BadTag);
        }
        let q_len = r.read_gamma()? - 1;
        let q: Program = BitString::from_bits(
            r.read_bits(q_len as usize).ok_or(WrapError::Truncated)?.to_vec(),
        )
        .into();
        let s: Program = BitString::from_bits(bits[r.position()..].to_vec()).into();
        Ok(wrap_observer(&q, &s))
    }
}

/// Runs the wrapped observer against the universal stream, computed on
/// demand under one shared step budget.
pub fn run_wrapped(w: &WrappedObserver, budget: RunBudget) -> ObserverRun {
    let mut meter = StepMeter::new(budget.max_steps());
    let mut stream = LazyUtoe::new(budget);
    let mut row = ExtractedRow {
        stream: &mut stream,
        q: w.embedded_q.clone(),
    };
    ObserverState::new(w.embedded_s.clone()).run(&mut row, &mut meter, budget.max_output_bits())
}

struct SnapshotRow<'a> {
    cells: &'a [TriBit],
    q: &'a Program,
}

impl UniverseSource for SnapshotRow<'_> {
    fn bit(&mut self, index: usize, _meter: &mut StepMeter) -> Option<bool> {
        let cell = Cell::new(self.q.clone(), index as u64 + 1).ok()?;
        let i = cell_index(&cell).ok()?;
        self.cells.get(i as usize - 1)?.bit()
    }
}

/// Runs the wrapped observer against a materialized prefix of the stream.
/// Cells past the prefix, or `#`, block the observer.
pub fn run_wrapped_on_snapshot(w: &WrappedObserver, cells: &[TriBit], budget: RunBudget) -> ObserverRun {
    let mut meter = StepMeter::new(budget.max_steps());
    let mut row = SnapshotRow {
        cells,
        q: &w.embedded_q,
    };
    ObserverState::new(w.embedded_s.clone()).run(&mut row, &mut meter, budget.max_output_bits())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::gadgets::ident_1;
    use crate::machine::{run_interleaved, ObserverStatus};
    use crate::utoe::utoe_stream;

    fn budget() -> RunBudget {
        RunBudget::new(10_000, 64).unwrap()
    }

    #[test]
    fn wrapped_copy_matches_direct() {
        let q: Program = "001".parse().unwrap();
        let w = wrap_observer(&q, &ident_1());
        let wrapped = run_wrapped(&w, budget());
        let (_, direct) = run_interleaved(&q, &ident_1(), budget());
        assert_eq!(wrapped.observation.to_string(), "1");
        assert_eq!(wrapped.observation, direct.observation);
        assert_eq!(wrapped.status, direct.status);
    }

    #[test]
    fn wrapped_empty_generator_blocks() {
        let w = wrap_observer(&Program::empty(), &ident_1());
        let r = run_wrapped(&w, budget());
        assert!(r.observation.is_empty());
        assert_eq!(r.status, ObserverStatus::Blocked);
    }

    #[test]
    fn declared_length_accounting() {
        let q: Program = "001".parse().unwrap();
        let w = wrap_observer(&q, &ident_1());
        assert_eq!(w.overhead(), 8 + 5);
        assert_eq!(w.to_bits().len() as u64, w.declared_length);
        assert_eq!(WrappedObserver::from_bits(&w.to_bits()), Ok(w));
        // Overhead depends on |q| only.
        let w2 = wrap_observer(&q, &Program::empty());
        assert_eq!(w2.overhead(), 13);
    }

    #[test]
    fn decode_errors() {
        assert_eq!(WrappedObserver::from_bits(&[true]), Err(WrapError::BadTag));
        let mut b: BitString = EXTRACTOR_TAG.parse().unwrap();
        b.extend_from(&[false, false, true, true, true]);
        assert_eq!(WrappedObserver::from_bits(&b), Err(WrapError::Truncated));
    }

    #[test]
    fn snapshot_reading_matches_lazy_stream() {
        let q: Program = "001000".parse().unwrap();
        let s = crate::machine::gadgets::ident(2);
        let w = wrap_observer(&q, &s);
        let cells = utoe_stream(3000, budget());
        let from_snapshot = run_wrapped_on_snapshot(&w, &cells, budget());
        assert_eq!(from_snapshot.observation.to_string(), "10");
        assert_eq!(from_snapshot.observation, run_wrapped(&w, budget()).observation);
        // Too short a snapshot blocks.
        let short = run_wrapped_on_snapshot(&w, &cells[..10], budget());
        assert_eq!(short.status, ObserverStatus::Blocked);
    }
}
