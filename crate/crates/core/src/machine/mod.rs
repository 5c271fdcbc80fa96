//! Reference machine M1: a monotone machine with a binary work tape and
//! eight 3-bit opcodes.
//!
//! | bits | opcode | effect |
//! |------|--------|--------|
//! | 000  | OUT0   | append 0 to the output |
//! | 001  | OUT1   | append 1 to the output |
//! | 010  | LEFT   | head one cell left |
//! | 011  | RIGHT  | head one cell right |
//! | 100  | FLIP   | toggle the current cell |
//! | 101  | JZ     | cell = 0: scan forward, nesting-aware, to just past the matching JNZ; no match halts |
//! | 110  | JNZ    | cell = 1: scan backward to just past the matching JZ; no match halts |
//! | 111  | IN     | observer: read the next universe bit into the cell; generator: halt |
//!
//! Each executed opcode and each opcode passed over by a jump scan costs
//! one step. Jump targets are found by scanning at jump time, never by
//! decoding the whole program up front, so bits past the furthest fetched
//! opcode cannot influence a run that did not observe the program end.

mod exec;
pub mod gadgets;
mod program;

pub use exec::{
    run_generator, run_interleaved, run_observer, run_observer_on, BudgetError, GeneratorRun,
    GeneratorState, HaltCause, LiveGenerator, ObserverRun, ObserverState, ObserverStatus,
    RunBudget, RunStatus, StepMeter, UniverseSource,
};
pub use program::{Opcode, Program};

/// Version tag of the reference machine, recorded in caches and reports.
pub const MACHINE_VERSION: &str = "M1";
