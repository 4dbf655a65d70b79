//! Simulation and analysis of quantum-state transfer across open XX spin-1/2
//! chains whose second and last-but-one sites carry strong local fields.
//!
//! The fields act as tunnelling barriers: two eigenstates become bi-localized
//! on the chain ends and the excitation Rabi-oscillates between sender
//! (site 1) and receiver (site N). Everything here works in the
//! single-excitation sector, where the chain Hamiltonian is an N×N symmetric
//! tridiagonal matrix. Energies are in units of the exchange coupling J and
//! times in units of 1/J. Sites are numbered 1..=N throughout the public API.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod disorder;
pub mod ebit;
pub mod effective;
pub mod error;
pub mod integrate;
pub mod metrics;
pub mod oracle;
pub mod protocol;
pub mod spectral;
mod tridiag;

pub use chain::{
    barrier_profile, build_hamiltonian, ebit_barrier_profile, ChainSpec, FieldProfile,
    ProfileConfig, SingleExcitationHamiltonian, Site,
};
pub use error::{QstError, Result};
pub use metrics::{
    average_fidelity, ipr, localization_report, max_fidelity, rabi_transfer_time,
    LocalizationReport, Peak, PeakSearch, TransferRecord,
};
pub use num_complex::Complex64;
pub use spectral::{eigendecompose, eigendecompose_with, evolve, transition_amplitude, AmplitudeKernel, AmplitudeVector, SpectralDecomposition, VectorMethod};
