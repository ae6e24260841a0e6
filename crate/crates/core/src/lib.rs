//! Numerical laboratory for discrete Schrödinger operators whose potentials
//! are sampled along orbits of torus rotations and the skew-shift.

pub mod cli;
pub mod diophantine;
pub mod dynsys;
pub mod error;
pub mod output;
pub mod potential;
pub mod repetition;
pub mod spectrum;
pub mod transfer;

pub use error::{Error, Result};
