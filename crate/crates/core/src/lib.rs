//! Simulation and analysis of quantum-dot spin-photon cluster-state
//! generation.
//!
//! A heavy-hole spin is repeatedly excited to the trion, emits a photon
//! whose polarization is entangled with the spin, and precesses a quarter
//! turn in a transverse magnetic field before the next pulse. The crate
//! builds the resulting one-cycle process map from a frozen nuclear-field
//! central-spin model, reconstructs maps from synthetic polarization
//! tomography, and evaluates cluster-state witnesses, localizable
//! entanglement and photon indistinguishability.

pub mod central_spin;
pub mod cli;
pub mod channel;
pub mod cluster;
pub mod cycle;
pub mod error;
pub mod indist;
pub mod linalg;
pub mod mc;
pub mod params;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
