//! Eigendecomposition of the single-excitation Hamiltonian and exact
//! propagation by spectral expansion.
//!
//! Between switching events the chain Hamiltonian is constant, and the
//! amplitudes at a later time are
//!
//! ```text
//! β_s(t) = Σ_k a_{k,s} e^{−iλ_k t} Σ_j a_{k,j} β_j(0).
//! ```
//!
//! The same propagator can be written with the characteristic polynomial
//! P(λ) = det(H − λ) and the cofactors Q_{k,s}(λ) of (H − λ): for a simple
//! eigenvalue λ_j the spectral projector is adj(H − λ)/(−P'(λ)) at λ = λ_j,
//! and for a tridiagonal matrix the cofactor of entry (k,s) carries the sign
//! (−1)^{k+s} times a product of sub-determinants. Summing the projectors
//! against e^{−iλ_j t} gives back the expansion above. Evaluating the
//! determinants directly is ill-conditioned for long chains, so only the
//! eigenvector form is implemented.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::chain::{SingleExcitationHamiltonian, Site};
use crate::error::{QstError, Result};
use crate::tridiag;
pub use crate::tridiag::VectorMethod;

/// Components below this magnitude are skipped when fixing eigenvector signs.
const SIGN_FLOOR: f64 = 1e-10;

/// Eigenvalues in ascending order with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Column-major; column k is a_k.
    vectors: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector a_k, 0-based k in ascending-eigenvalue order.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }

    /// a_{k,site}.
    pub fn component(&self, k: usize, site: Site) -> f64 {
        self.vectors[k * self.n + site.index()]
    }

    /// Coefficients ⟨a_k|ψ⟩.
    pub fn project(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|k| {
                self.eigenvector(k)
                    .iter()
                    .zip(amplitudes)
                    .map(|(a, b)| b * a)
                    .sum()
            })
            .collect()
    }

    /// Kernel for ⟨to|e^{−iHt}|from⟩.
    pub fn transition_kernel(&self, from: Site, to: Site) -> Result<AmplitudeKernel> {
        let from = from.check(self.n)?;
        let to = to.check(self.n)?;
        let weights = (0..self.n)
            .map(|k| Complex64::new(self.component(k, to) * self.component(k, from), 0.0))
            .collect();
        Ok(AmplitudeKernel { eigenvalues: self.eigenvalues.clone(), weights })
    }

    /// Kernel for ⟨to|e^{−iHt}|ψ⟩ with an arbitrary initial state.
    pub fn state_kernel(&self, initial: &[Complex64], to: Site) -> Result<AmplitudeKernel> {
        if initial.len() != self.n {
            return Err(QstError::LengthMismatch { expected: self.n, got: initial.len() });
        }
        let to = to.check(self.n)?;
        let coeffs = self.project(initial);
        let weights = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * self.component(k, to))
            .collect();
        Ok(AmplitudeKernel { eigenvalues: self.eigenvalues.clone(), weights })
    }
}

/// Full decomposition of H^(1), sign-fixed so the first non-negligible
/// component of every eigenvector is positive.
///
/// Mirror-symmetric matrices are split into reflection-even and -odd blocks
/// first. Otherwise pairs of states localized on mirror-image sites (the two
/// barrier states, say) are split by far less than machine precision and
/// would come out as arbitrary mixtures instead of parity eigenstates.
pub fn eigendecompose(h: &SingleExcitationHamiltonian) -> Result<SpectralDecomposition> {
    eigendecompose_with(h, VectorMethod::Auto)
}

/// [`eigendecompose`] with an explicit eigenvector method.
pub fn eigendecompose_with(h: &SingleExcitationHamiltonian, method: VectorMethod) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let (eigenvalues, mut vectors) = if n >= 2 && h.is_mirror_symmetric() {
        parity_blocks(h.diagonal(), h.off_diagonal(), method)?
    } else {
        tridiag::eigensystem(h.diagonal(), h.off_diagonal(), method)?
    };
    for col in vectors.chunks_mut(n) {
        if let Some(first) = col.iter().find(|x| x.abs() > SIGN_FLOOR) {
            if *first < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
    Ok(SpectralDecomposition { n, eigenvalues, vectors })
}

fn parity_blocks(d: &[f64], e: &[f64], method: VectorMethod) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    let m = n / 2;
    let r2 = std::f64::consts::SQRT_2;

    // Reflection-even block.
    let (even_d, even_e) = if n.is_multiple_of(2) {
        let mut dd = d[..m].to_vec();
        dd[m - 1] += e[m - 1];
        (dd, e[..m - 1].to_vec())
    } else {
        let mut ee = e[..m].to_vec();
        ee[m - 1] *= r2;
        (d[..=m].to_vec(), ee)
    };
    // Reflection-odd block; the centre site carries no amplitude for odd n.
    let (odd_d, odd_e) = if n.is_multiple_of(2) {
        let mut dd = d[..m].to_vec();
        dd[m - 1] -= e[m - 1];
        (dd, e[..m - 1].to_vec())
    } else {
        (d[..m].to_vec(), e[..m.saturating_sub(1)].to_vec())
    };

    let (even_vals, even_vecs) = tridiag::eigensystem(&even_d, &even_e, method)?;
    let (odd_vals, odd_vecs) = if odd_d.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        tridiag::eigensystem(&odd_d, &odd_e, method)?
    };

    let mut entries: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    let ne = even_d.len();
    for (k, &lam) in even_vals.iter().enumerate() {
        let u = &even_vecs[k * ne..(k + 1) * ne];
        let mut v = vec![0.0; n];
        for i in 0..m {
            v[i] = u[i] / r2;
            v[n - 1 - i] = u[i] / r2;
        }
        if n % 2 == 1 {
            v[m] = u[m];
        }
        entries.push((lam, v));
    }
    let no = odd_d.len();
    for (k, &lam) in odd_vals.iter().enumerate() {
        let u = &odd_vecs[k * no..(k + 1) * no];
        let mut v = vec![0.0; n];
        for i in 0..m {
            v[i] = u[i] / r2;
            v[n - 1 - i] = -u[i] / r2;
        }
        entries.push((lam, v));
    }
    // Stable sort: ties keep the even state first.
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));

    let vals = entries.iter().map(|(l, _)| *l).collect();
    let vecs = entries.into_iter().flat_map(|(_, v)| v).collect();
    Ok((vals, vecs))
}

/// Complex single-excitation wavefunction β_j at a time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl AmplitudeVector {
    pub fn new(amplitudes: Vec<Complex64>, time: f64) -> Self {
        Self { amplitudes, time }
    }

    /// The excitation sitting on one site at t = 0.
    pub fn localized(n_sites: usize, site: Site) -> Result<Self> {
        let site = site.check(n_sites)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_sites];
        amplitudes[site.index()] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, time: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn amplitude(&self, site: Site) -> Result<Complex64> {
        let site = site.check(self.len())?;
        Ok(self.amplitudes[site.index()])
    }

    pub fn population(&self, site: Site) -> Result<f64> {
        Ok(self.amplitude(site)?.norm_sqr())
    }
}

/// β(t) = Σ_k a_k ⟨a_k|β(0)⟩ e^{−iλ_k t}; the time stamp advances by `t`.
pub fn evolve(decomp: &SpectralDecomposition, initial: &AmplitudeVector, t: f64) -> Result<AmplitudeVector> {
    let n = decomp.dim();
    if initial.len() != n {
        return Err(QstError::LengthMismatch { expected: n, got: initial.len() });
    }
    let coeffs = decomp.project(&initial.amplitudes);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -decomp.eigenvalues[k] * t) * c;
        for (o, a) in out.iter_mut().zip(decomp.eigenvector(k)) {
            *o += phase * a;
        }
    }
    Ok(AmplitudeVector { amplitudes: out, time: initial.time + t })
}

/// f_{to,from}(t) = Σ_k a_{k,to} a_{k,from} e^{−iλ_k t}.
pub fn transition_amplitude(decomp: &SpectralDecomposition, from: Site, to: Site, t: f64) -> Result<Complex64> {
    Ok(decomp.transition_kernel(from, to)?.amplitude(t))
}

/// A sum Σ_k w_k e^{−iλ_k t}, the form every amplitude in a constant field
/// takes. Built once per (decomposition, initial state, target site) and
/// evaluated on many times.
#[derive(Debug, Clone)]
pub struct AmplitudeKernel {
    eigenvalues: Vec<f64>,
    weights: Vec<Complex64>,
}

/// Grid points evaluated by phasor recurrence before re-seeding exactly.
const RESEED: usize = 256;

impl AmplitudeKernel {
    pub fn new(eigenvalues: Vec<f64>, weights: Vec<Complex64>) -> Result<Self> {
        if eigenvalues.len() != weights.len() {
            return Err(QstError::LengthMismatch { expected: eigenvalues.len(), got: weights.len() });
        }
        Ok(Self { eigenvalues, weights })
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(&l, w)| w * Complex64::from_polar(1.0, -l * t))
            .sum()
    }

    /// |amplitude| on the grid t0 + i·step, i < count.
    ///
    /// Blocks of [`RESEED`] points are evaluated in parallel; each starts from
    /// exact phases and advances by multiplication, so the output does not
    /// depend on the thread count.
    pub fn scan_abs(&self, t0: f64, step: f64, count: usize) -> Vec<f64> {
        let n_blocks = count.div_ceil(RESEED);
        let blocks: Vec<Vec<f64>> = (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let start = b * RESEED;
                let len = RESEED.min(count - start);
                let ts = t0 + start as f64 * step;
                let mut terms: Vec<Complex64> = self
                    .eigenvalues
                    .iter()
                    .zip(&self.weights)
                    .map(|(&l, w)| w * Complex64::from_polar(1.0, -l * ts))
                    .collect();
                let steps: Vec<Complex64> =
                    self.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * step)).collect();
                let mut out = Vec::with_capacity(len);
                for i in 0..len {
                    if i > 0 {
                        terms.iter_mut().zip(&steps).for_each(|(t, s)| *t *= s);
                    }
                    out.push(terms.iter().sum::<Complex64>().norm());
                }
                out
            })
            .collect();
        blocks.concat()
    }
}
