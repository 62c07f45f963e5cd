//! Simulation of single photons at beam splitters: exact Fock-space
//! amplitudes, click and homodyne detection, heralded sources, and
//! maximum-likelihood homodyne tomography.

pub mod error;
pub mod experiments;
pub mod fock;
pub mod measurement;
pub mod rng;
pub mod sources;
pub mod tomography;

pub use error::{Error, Result};
