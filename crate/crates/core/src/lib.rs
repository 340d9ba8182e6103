//! Quantum-limited single-parameter estimation with a fixed projective readout.
//!
//! The crate builds symmetric logarithmic derivatives, computes classical and
//! quantum Fisher information, searches for probe states that saturate the
//! quantum Cramér–Rao bound under a given readout, and checks the resulting
//! uncertainty scaling by Monte Carlo simulation.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod golden;
pub mod operator;
pub mod report;
pub mod search;
pub mod seed;
pub mod sld;
pub mod solver;
pub mod state;
pub mod system;

pub use error::{Error, Result};
