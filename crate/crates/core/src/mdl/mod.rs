//! Description lengths and two-part scores.

pub mod gamma;
pub mod model;
pub mod streams;
pub mod score;
