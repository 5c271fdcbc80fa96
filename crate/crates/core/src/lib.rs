//! Desk-scale laboratory for complete theories of everything: a toy
//! monotone universal machine, exhaustive enumeration of its programs,
//! the dovetailed universal generator, and code-length based theory
//! selection.

pub mod bits;
pub mod enumerate;
pub mod machine;
pub mod mdl;
pub mod predict;
pub mod utoe;

pub use bits::BitString;
pub use machine::{Program, RunBudget};
