//! Brute-force reference dynamics in the full 2^N Hilbert space.
//!
//! Nothing here uses the single-excitation reduction. The Hamiltonian is
//! assembled from Pauli strings, diagonalized densely, and observables are
//! read off reduced density matrices. Meant for validation at N ≤ 12.
//!
//! Basis convention: bit q−1 of a basis index is 1 when qubit q is flipped
//! (|1⟩, spin down). Qubit 1 is the least significant bit.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::{barrier_profile, build_hamiltonian, ebit_barrier_profile, ChainSpec, FieldProfile, Site};
use crate::ebit::{evolve_ebit, pair_concurrence, EbitState};
use crate::error::{QstError, Result};
use crate::spectral::{eigendecompose, evolve, transition_amplitude, AmplitudeVector};

pub const MAX_ORACLE_SITES: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigenvalues of a density matrix above this are accepted as round-off.
const NEGATIVE_TOL: f64 = 1e-10;
const CLIP: f64 = 1e-13;

fn check_size(n: usize) -> Result<()> {
    if n > MAX_ORACLE_SITES {
        return Err(QstError::TooLarge { n_sites: n, max: MAX_ORACLE_SITES });
    }
    if n == 0 {
        return Err(QstError::TooFewSites { required: 1, got: 0 });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullStateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl FullStateVector {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        // One spare qubit is allowed for an uncoupled partner.
        if n_qubits == 0 || n_qubits > MAX_ORACLE_SITES + 1 {
            return Err(QstError::TooLarge { n_sites: n_qubits, max: MAX_ORACLE_SITES + 1 });
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(QstError::LengthMismatch { expected: 1 << n_qubits, got: amplitudes.len() });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// |0⟩^{⊗N}.
    pub fn vacuum(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let mut a = vec![ZERO; 1 << n_qubits];
        a[0] = ONE;
        Ok(Self { n_qubits, amplitudes: a })
    }

    /// |j⟩ = σ_j⁻|0⟩^{⊗N}: one flipped spin on `site`.
    pub fn single_excitation(n_qubits: usize, site: Site) -> Result<Self> {
        check_size(n_qubits)?;
        let site = site.check(n_qubits)?;
        let mut a = vec![ZERO; 1 << n_qubits];
        a[1 << site.index()] = ONE;
        Ok(Self { n_qubits, amplitudes: a })
    }

    /// Σ_j c_j |j⟩ from single-excitation amplitudes.
    pub fn from_sector(amplitudes: &[Complex64]) -> Result<Self> {
        let n = amplitudes.len();
        check_size(n)?;
        let mut a = vec![ZERO; 1 << n];
        for (j, c) in amplitudes.iter().enumerate() {
            a[1 << j] = *c;
        }
        Ok(Self { n_qubits: n, amplitudes: a })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨Σ_q σ^z_q⟩.
    pub fn magnetization(&self) -> f64 {
        let n = self.n_qubits as i64;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * (n - 2 * i.count_ones() as i64) as f64)
            .sum()
    }

    /// Weight outside the single-excitation subspace.
    pub fn leak(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i.count_ones() != 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Amplitudes on |1⟩ … |N⟩.
    pub fn sector_amplitudes(&self) -> Vec<Complex64> {
        (0..self.n_qubits).map(|j| self.amplitudes[1 << j]).collect()
    }

    /// |self⟩ ⊗ |0⟩ on a new most-significant qubit.
    fn with_ancilla(&self) -> Self {
        let mut a = self.amplitudes.clone();
        a.resize(a.len() * 2, ZERO);
        Self { n_qubits: self.n_qubits + 1, amplitudes: a }
    }
}

/// A Pauli operator on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Adds coeff·P_{q1}⊗P_{q2}⊗… (0-based qubits) to a dense matrix.
fn add_pauli_string(h: &mut DMatrix<Complex64>, n: usize, coeff: f64, ops: &[(usize, Pauli)]) {
    for col in 0..1usize << n {
        let mut row = col;
        let mut amp = Complex64::new(coeff, 0.0);
        for &(q, p) in ops {
            let bit = (row >> q) & 1;
            match p {
                Pauli::X => row ^= 1 << q,
                Pauli::Y => {
                    // σy|0⟩ = i|1⟩, σy|1⟩ = −i|0⟩
                    amp *= if bit == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
                    row ^= 1 << q;
                }
                Pauli::Z => {
                    if bit == 1 {
                        amp = -amp;
                    }
                }
            }
        }
        h[(row, col)] += amp;
    }
}

/// H = −J { ½ Σ_n (σˣ_nσˣ_{n+1} + σʸ_nσʸ_{n+1}) + Σ_n K_n σᶻ_n } as a dense
/// real symmetric 2^N matrix.
pub fn xx_hamiltonian_dense(chain: &ChainSpec, profile: &FieldProfile) -> Result<DMatrix<f64>> {
    let n = chain.n_sites();
    check_size(n)?;
    if profile.len() != n {
        return Err(QstError::LengthMismatch { expected: n, got: profile.len() });
    }
    let j = chain.coupling();
    let dim = 1 << n;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for q in 0..n - 1 {
        add_pauli_string(&mut h, n, -0.5 * j, &[(q, Pauli::X), (q + 1, Pauli::X)]);
        add_pauli_string(&mut h, n, -0.5 * j, &[(q, Pauli::Y), (q + 1, Pauli::Y)]);
    }
    for (q, &k) in profile.as_slice().iter().enumerate() {
        if k != 0.0 {
            add_pauli_string(&mut h, n, -j * k, &[(q, Pauli::Z)]);
        }
    }
    let max_imag = h.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > 1e-12 {
        return Err(QstError::NonPhysical(format!("XX Hamiltonian has imaginary part {max_imag}")));
    }
    Ok(h.map(|z| z.re))
}

/// e^{−iHt} on the chain qubits through a dense eigendecomposition.
#[derive(Debug, Clone)]
pub struct FullChainPropagator {
    n_sites: usize,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl FullChainPropagator {
    pub fn new(chain: &ChainSpec, profile: &FieldProfile) -> Result<Self> {
        let h = xx_hamiltonian_dense(chain, profile)?;
        let eig = h.symmetric_eigen();
        Ok(Self { n_sites: chain.n_sites(), energies: eig.eigenvalues, vectors: eig.eigenvectors })
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    fn apply_block(&self, block: &[Complex64], t: f64) -> Vec<Complex64> {
        let dim = block.len();
        let v = &self.vectors;
        let mut coeff = vec![ZERO; dim];
        for (k, c) in coeff.iter_mut().enumerate() {
            let col = v.column(k);
            let mut acc = ZERO;
            for (i, b) in block.iter().enumerate() {
                acc += b * col[i];
            }
            *c = acc * Complex64::from_polar(1.0, -self.energies[k] * t);
        }
        let mut out = vec![ZERO; dim];
        for (k, c) in coeff.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            let col = v.column(k);
            for (o, x) in out.iter_mut().zip(col.iter()) {
                *o += c * x;
            }
        }
        out
    }

    /// Evolves `state`, whose first N qubits are the chain. Any further
    /// qubits are uncoupled spectators.
    pub fn evolve(&self, state: &FullStateVector, t: f64) -> Result<FullStateVector> {
        if state.n_qubits < self.n_sites {
            return Err(QstError::LengthMismatch { expected: self.n_sites, got: state.n_qubits });
        }
        let block = 1 << self.n_sites;
        let amplitudes = state.amplitudes.chunks(block).flat_map(|b| self.apply_block(b, t)).collect();
        Ok(FullStateVector { n_qubits: state.n_qubits, amplitudes })
    }
}

/// e^{−iHt}|ψ⟩ for the chain's full Hamiltonian.
pub fn full_evolve(chain: &ChainSpec, profile: &FieldProfile, initial: &FullStateVector, t: f64) -> Result<FullStateVector> {
    FullChainPropagator::new(chain, profile)?.evolve(initial, t)
}

/// Density matrix of the kept qubits (one or two), the others traced out.
/// For two qubits the first listed is the more significant tensor factor.
pub fn reduced_state(state: &FullStateVector, kept: &[Site]) -> Result<DMatrix<Complex64>> {
    let n = state.n_qubits;
    let idx: Vec<usize> = kept.iter().map(|s| s.check(n).map(|s| s.index())).collect::<Result<_>>()?;
    match idx.as_slice() {
        [_] => {}
        [a, b] if a != b => {}
        _ => return Err(QstError::InvalidParameter(format!("reduced_state keeps one or two distinct qubits, got {kept:?}"))),
    }
    let k = idx.len();
    let mask: usize = idx.iter().map(|q| 1 << q).sum();
    let local = |i: usize| idx.iter().fold(0, |acc, &q| (acc << 1) | ((i >> q) & 1));
    let mut rho = DMatrix::<Complex64>::zeros(1 << k, 1 << k);
    // Group amplitudes by the environment configuration.
    let mut env: std::collections::BTreeMap<usize, Vec<(usize, Complex64)>> = Default::default();
    for (i, a) in state.amplitudes.iter().enumerate() {
        if *a != ZERO {
            env.entry(i & !mask).or_default().push((local(i), *a));
        }
    }
    for group in env.values() {
        for &(r, ar) in group {
            for &(c, ac) in group {
                rho[(r, c)] += ar * ac.conj();
            }
        }
    }
    Ok(rho)
}

fn hermitian_sqrt(rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let eig = rho.clone().symmetric_eigen();
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < -NEGATIVE_TOL {
            return Err(QstError::NonPhysical(format!("density matrix eigenvalue {v}")));
        }
        *v = if *v < CLIP { 0.0 } else { v.sqrt() };
    }
    let u = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&vals.map(|x| Complex64::new(x, 0.0)));
    Ok(u * d * u.adjoint())
}

/// Wootters concurrence max(0, μ₁−μ₂−μ₃−μ₄), μ the decreasing square roots
/// of the eigenvalues of ρ(σʸ⊗σʸ)ρ*(σʸ⊗σʸ).
pub fn wootters_concurrence(rho: &DMatrix<Complex64>) -> Result<f64> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(QstError::InvalidParameter(format!("expected a 4x4 density matrix, got {}x{}", rho.nrows(), rho.ncols())));
    }
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > 1e-10 {
        return Err(QstError::NonPhysical(format!("density matrix not Hermitian (deviation {herm})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(QstError::NonPhysical(format!("density matrix trace {tr}")));
    }
    let i = Complex64::new(0.0, 1.0);
    let sy = Matrix2::new(ZERO, -i, i, ZERO);
    let yy: Matrix4<Complex64> = sy.kronecker(&sy);
    let yy = DMatrix::from_iterator(4, 4, yy.iter().cloned());
    let s = hermitian_sqrt(rho)?;
    // √(eig(ρρ̃)) are the singular values of √ρ (σʸ⊗σʸ) √ρ*.
    let m = &s * &yy * s.map(|z| z.conj());
    let mut mu: Vec<f64> = m.singular_values().iter().cloned().collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).max(0.0))
}

/// Fixed-step RK4 for i dβ/dt = H(t) β with a dense H(t).
pub fn integrate_dense<F>(hamiltonian: F, initial: &[Complex64], t0: f64, t1: f64, steps: usize) -> Vec<Complex64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let mi = Complex64::new(0.0, -1.0);
    let rhs = |t: f64, x: &DVector<Complex64>| -> DVector<Complex64> {
        hamiltonian(t).map(|v| Complex64::new(v, 0.0)) * x * mi
    };
    let mut x = DVector::from_column_slice(initial);
    if steps == 0 {
        return x.iter().cloned().collect();
    }
    let h = (t1 - t0) / steps as f64;
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let k1 = rhs(t, &x);
        let k2 = rhs(t + 0.5 * h, &(&x + &k1 * Complex64::new(0.5 * h, 0.0)));
        let k3 = rhs(t + 0.5 * h, &(&x + &k2 * Complex64::new(0.5 * h, 0.0)));
        let k4 = rhs(t + h, &(&x + &k3 * Complex64::new(h, 0.0)));
        x += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);
    }
    x.iter().cloned().collect()
}

/// Dense copy of a chain's single-excitation block built independently of
/// the chain module: 2J·K_n on the diagonal, −J beside it.
pub fn sector_matrix_dense(chain: &ChainSpec, profile: &FieldProfile) -> DMatrix<f64> {
    let n = chain.n_sites();
    let j = chain.coupling();
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            2.0 * j * profile.as_slice()[r]
        } else if r.abs_diff(c) == 1 {
            -j
        } else {
            0.0
        }
    })
}

/// Concurrence between an external qubit and site N after the first spin,
/// initially in a singlet with that qubit, evolves for time t.
pub fn external_singlet_concurrence(propagator: &FullChainPropagator, t: f64) -> Result<f64> {
    let n = propagator.n_sites;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // (|0⟩_ext|1⟩_1 − |1⟩_ext|0⟩_1)/√2; the external qubit is qubit N+1.
    let mut state = FullStateVector::vacuum(n)?.with_ancilla();
    state.amplitudes[0] = ZERO;
    state.amplitudes[1] = Complex64::new(r, 0.0);
    state.amplitudes[1 << n] = Complex64::new(-r, 0.0);
    let out = propagator.evolve(&state, t)?;
    wootters_concurrence(&reduced_state(&out, &[Site::new(n + 1, n + 1)?, Site::new(n, n + 1)?])?)
}

/// F̄ from Monte Carlo over Haar-random inputs α|0⟩+β|1⟩ on site 1, with
/// the receiver's fixed phase correction e^{−i arg f} applied to site N.
pub fn bloch_average_fidelity(propagator: &FullChainPropagator, t: f64, samples: usize, seed: u64) -> Result<f64> {
    let n = propagator.n_sites;
    let vac = propagator.evolve(&FullStateVector::vacuum(n)?, t)?;
    let one = propagator.evolve(&FullStateVector::single_excitation(n, Site::first())?, t)?;
    let last = Site::last(n).index();

    // Site-N blocks of |a⟩⟨b| for a, b ∈ {U|0⟩, U|1⟩}, environment traced out.
    let cross = |a: &FullStateVector, b: &FullStateVector| -> Matrix2<Complex64> {
        let mut m = Matrix2::zeros();
        for i in 0..a.amplitudes.len() {
            if (i >> last) & 1 == 1 {
                continue;
            }
            let j = i | (1 << last);
            let (a0, a1) = (a.amplitudes[i], a.amplitudes[j]);
            let (b0, b1) = (b.amplitudes[i], b.amplitudes[j]);
            m[(0, 0)] += a0 * b0.conj();
            m[(0, 1)] += a0 * b1.conj();
            m[(1, 0)] += a1 * b0.conj();
            m[(1, 1)] += a1 * b1.conj();
        }
        m
    };
    let blocks = [[cross(&vac, &vac), cross(&vac, &one)], [cross(&one, &vac), cross(&one, &one)]];
    // Relative phase acquired by the flipped receiver, as seen in the full space.
    let f = one.amplitudes[1 << last] * vac.amplitudes[0].conj();
    let corr = Matrix2::new(ONE, ZERO, ZERO, Complex64::from_polar(1.0, -f.arg()));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..samples {
        let cos_theta: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let alpha = Complex64::new(((1.0 + cos_theta) / 2.0).sqrt(), 0.0);
        let beta = Complex64::from_polar(((1.0 - cos_theta) / 2.0).sqrt(), phi);
        let c = [alpha, beta];
        let mut rho = Matrix2::zeros();
        for (x, cx) in c.iter().enumerate() {
            for (y, cy) in c.iter().enumerate() {
                rho += blocks[x][y] * (cx * cy.conj());
            }
        }
        let rho = corr * rho * corr.adjoint();
        let psi = nalgebra::Vector2::new(alpha, beta);
        total += (psi.adjoint() * rho * psi)[(0, 0)].re;
    }
    Ok(total / samples as f64)
}

/// One line of the `oracle-check` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleCheck {
    fn new(name: &str, max_deviation: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), max_deviation, tolerance, passed: max_deviation <= tolerance }
    }
}

fn random_barrier(rng: &mut ChaCha8Rng, n: usize) -> Result<(ChainSpec, FieldProfile)> {
    let spec = ChainSpec::uniform(n)?;
    let omega = rng.random_range(0.0..30.0);
    Ok((spec, barrier_profile(&spec, omega)?))
}

/// Oracle comparisons against the fast single-excitation path on small chains.
pub fn run_checks(seed: u64) -> Result<Vec<OracleCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amp = 0.0f64;
    let mut magnet = 0.0f64;
    let mut leak = 0.0f64;
    let mut ext = 0.0f64;
    let mut pair = 0.0f64;
    for n in 4..=8 {
        for _ in 0..4 {
            let (spec, profile) = random_barrier(&mut rng, n)?;
            let t = rng.random_range(0.0..200.0);
            let prop = FullChainPropagator::new(&spec, &profile)?;
            let decomp = eigendecompose(&build_hamiltonian(&spec, &profile)?)?;

            let init = FullStateVector::single_excitation(n, Site::first())?;
            let out = prop.evolve(&init, t)?;
            let fast = evolve(&decomp, &AmplitudeVector::localized(n, Site::first())?, t)?;
            for (a, b) in out.sector_amplitudes().iter().zip(&fast.amplitudes) {
                amp = amp.max((a.norm() - b.norm()).abs());
            }
            magnet = magnet.max((out.magnetization() - init.magnetization()).abs());
            leak = leak.max(out.leak());

            let f = transition_amplitude(&decomp, Site::first(), Site::last(n), t)?;
            ext = ext.max((external_singlet_concurrence(&prop, t)? - f.norm()).abs());

            if n >= 6 {
                let ep = ebit_barrier_profile(&spec, rng.random_range(0.0..20.0))?;
                let eprop = FullChainPropagator::new(&spec, &ep)?;
                let edec = eigendecompose(&build_hamiltonian(&spec, &ep)?)?;
                let s = EbitState::bell();
                let p = evolve_ebit(&edec, &s, t)?;
                let mut init = vec![ZERO; n];
                init[0] = s.alpha;
                init[1] = s.beta;
                let full = eprop.evolve(&FullStateVector::from_sector(&init)?, t)?;
                let rho = reduced_state(&full, &[Site::new(n - 1, n)?, Site::last(n)])?;
                pair = pair.max((wootters_concurrence(&rho)? - pair_concurrence(&p)?).abs());
            }
        }
    }

    let (spec, profile) = random_barrier(&mut rng, 6)?;
    let prop = FullChainPropagator::new(&spec, &profile)?;
    let decomp = eigendecompose(&build_hamiltonian(&spec, &profile)?)?;
    let t = rng.random_range(1.0..20.0);
    let f = transition_amplitude(&decomp, Site::first(), Site::last(6), t)?.norm();
    let bloch = (bloch_average_fidelity(&prop, t, 200_000, seed)? - (f / 3.0 + f * f / 6.0 + 0.5)).abs();

    let spec = ChainSpec::uniform(10)?;
    let profile = barrier_profile(&spec, 3.0)?;
    let dense = sector_matrix_dense(&spec, &profile);
    let init = AmplitudeVector::localized(10, Site::first())?;
    let rk = integrate_dense(|_| dense.clone(), &init.amplitudes, 0.0, 7.3, 20_000);
    let fast = evolve(&eigendecompose(&build_hamiltonian(&spec, &profile)?)?, &init, 7.3)?;
    let rk_dev = rk.iter().zip(&fast.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);

    Ok(vec![
        OracleCheck::new("sector amplitudes vs full space", amp, 1e-10),
        OracleCheck::new("magnetization conservation", magnet, 1e-10),
        OracleCheck::new("single-excitation leak", leak, 1e-12),
        OracleCheck::new("external-qubit concurrence = |f_N1|", ext, 1e-10),
        OracleCheck::new("pair concurrence = Wootters", pair, 1e-10),
        OracleCheck::new("Bloch-sphere average fidelity", bloch, 1e-3),
        OracleCheck::new("spectral propagator vs dense RK4", rk_dev, 1e-8),
    ])
}
