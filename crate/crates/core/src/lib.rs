//! Link-level simulation of free-space optical (FSO) links over Gamma-Gamma
//! atmospheric turbulence.
//!
//! The crate compares a classical square-QAM transmitter with maximum-likelihood
//! detection against three learned transceivers (a neural receiver, a neural
//! constellation shaper, and a jointly trained end-to-end pair), for single
//! aperture links and for repetition MIMO links with selection, equal-gain and
//! maximal-ratio combining.
//!
//! Modules, bottom-up:
//!
//! - [`turbulence`]: refractive-index profile, Rytov variance, Gamma-Gamma
//!   parameters, density and sampler.
//! - [`modem`]: constellations, symbol mapping, one-hot encoding.
//! - [`mimo`]: propagation, diversity combining and ML detection.
//! - [`neural`]: a small dense-network engine with backprop, SGD/Adam and a
//!   finite-difference gradient oracle.
//! - [`transceivers`]: the four transceiver variants, end-to-end training
//!   through the channel, SER evaluation.
//! - [`harness`]: config files, Es/N0 sweeps, CSV output, command line.

pub mod error;
pub mod harness;
pub mod mimo;
pub mod modem;
pub mod neural;
pub mod quad;
pub mod seed;
pub mod stats;
pub mod transceivers;
pub mod turbulence;

pub use error::{Error, Result};
pub use num_complex::Complex64;
