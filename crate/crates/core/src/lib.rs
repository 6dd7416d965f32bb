//! Dense state-vector simulation of T-doped random Clifford circuits.
//!
//! The crate covers the whole numerical pipeline: gate kernels on `2^N`
//! amplitudes ([`statevector`]), Schmidt spectra and bipartition entropies
//! ([`entanglement`]), level-spacing statistics of the entanglement spectrum
//! ([`ess`]), seeded random circuit families ([`circuits`]), Metropolis
//! entanglement cooling ([`cooling`]), ensemble statistics and the published
//! scaling laws ([`analysis`]), and amplitude colour maps ([`colormap`]).
//!
//! Ensembles of independent realizations run through [`parallel`], which uses
//! rayon when the default `parallel` feature is on and a plain loop otherwise.

pub mod analysis;
pub mod circuits;
pub mod colormap;
pub mod cooling;
pub mod entanglement;
mod error;
pub mod ess;
pub mod parallel;
pub mod rng;
pub mod statevector;

pub use error::{Error, Result};
pub use statevector::{Circuit, Gate, Marker, MarkerLabel, StateVector};
