//! Overlapping-generations economies.

pub mod samuelson;
pub mod tirole;
