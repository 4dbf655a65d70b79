//! Shared fixtures for the criterion benches.

use qst_core::{barrier_profile, build_hamiltonian, ChainSpec, FieldProfile, SingleExcitationHamiltonian};

/// Uniform chain of `n` sites with barriers of height `omega` on sites 2 and N−1.
pub fn barrier_chain(n: usize, omega: f64) -> (ChainSpec, FieldProfile, SingleExcitationHamiltonian) {
    let spec = ChainSpec::uniform(n).expect("valid chain length");
    let profile = barrier_profile(&spec, omega).expect("valid field");
    let h = build_hamiltonian(&spec, &profile).expect("matching lengths");
    (spec, profile, h)
}

/// Barrier chain with a deterministic bulk ripple, so the mirror-symmetry
/// split does not apply.
pub fn rippled_chain(n: usize, omega: f64) -> SingleExcitationHamiltonian {
    let (spec, profile, _) = barrier_chain(n, omega);
    let fields: Vec<f64> =
        profile.as_slice().iter().enumerate().map(|(i, k)| k + 0.1 * ((i * 7919) % 13) as f64 / 13.0).collect();
    build_hamiltonian(&spec, &FieldProfile::new(fields).expect("finite fields")).expect("matching lengths")
}
