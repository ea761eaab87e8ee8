//! Single-shot error correction for toric and surface codes.
//!
//! The crate builds check operators ([`codes`]) over GF(2) ([`gf2`]), samples
//! phenomenological and gate-level noise ([`noise`]), decodes with exact
//! minimum-weight perfect matching ([`decode`]), runs full correction trials
//! ([`protocol`]) and estimates thresholds from Monte Carlo sweeps
//! ([`stats`]).

pub mod codes;
pub mod decode;
pub mod error;
pub mod gf2;
pub mod noise;
pub mod protocol;
pub mod stats;

pub use error::{Error, Result};
