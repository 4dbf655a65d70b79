//! Transfer of an entangled pair: the excitation starts in α|1⟩ + β|2⟩ and
//! the received pair (N−1, N) is read out through its concurrence.

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{build_hamiltonian, ebit_barrier_profile, ChainSpec, FieldProfile, Site};
use crate::error::{QstError, Result};
use crate::metrics::{rabi_time_from_gap, Peak, PeakSearch};
use crate::spectral::{eigendecompose, AmplitudeKernel, SpectralDecomposition};

const NORM_TOL: f64 = 1e-10;

/// α|1⟩ + β|2⟩ with |α|² + |β|² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EbitState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl EbitState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(QstError::InvalidParameter(format!("e-bit state norm is {norm}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    /// (|1⟩ + |2⟩)/√2.
    pub fn bell() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { alpha: r, beta: r }
    }

    fn amplitudes(&self, n: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[0] = self.alpha;
        v[1] = self.beta;
        v
    }
}

/// p_j = α⟨j|e^{−iHt}|1⟩ + β⟨j|e^{−iHt}|2⟩ for every site j.
pub fn evolve_ebit(decomp: &SpectralDecomposition, state: &EbitState, t: f64) -> Result<Vec<Complex64>> {
    let n = decomp.dim();
    if n < 2 {
        return Err(QstError::TooFewSites { required: 2, got: n });
    }
    let coeffs = decomp.project(&state.amplitudes(n));
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -decomp.eigenvalues()[k] * t) * c;
        for (o, a) in out.iter_mut().zip(decomp.eigenvector(k)) {
            *o += phase * a;
        }
    }
    Ok(out)
}

/// C_{N−1,N} = 2|p_{N−1}||p_N|.
pub fn pair_concurrence(p: &[Complex64]) -> Result<f64> {
    let n = p.len();
    if n < 2 {
        return Err(QstError::TooFewSites { required: 2, got: n });
    }
    Ok(2.0 * p[n - 2].norm() * p[n - 1].norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EbitRecord {
    #[serde(rename = "t")]
    pub time: f64,
    pub abs_p_nm1: f64,
    pub abs_p_n: f64,
    pub concurrence: f64,
}

impl EbitRecord {
    pub const CSV_HEADER: &'static str = "t,abs_p_Nm1,abs_p_N,concurrence";
}

/// A chain with barriers on sites 3 and N−2 carrying a fixed input pair.
#[derive(Debug, Clone)]
pub struct EbitChannel {
    pub chain: ChainSpec,
    pub omega: f64,
    pub state: EbitState,
    profile: FieldProfile,
    decomp: SpectralDecomposition,
    to_nm1: AmplitudeKernel,
    to_n: AmplitudeKernel,
}

impl EbitChannel {
    pub fn new(chain: ChainSpec, omega: f64, state: EbitState) -> Result<Self> {
        let n = chain.n_sites();
        let profile = ebit_barrier_profile(&chain, omega)?;
        let decomp = eigendecompose(&build_hamiltonian(&chain, &profile)?)?;
        let amps = state.amplitudes(n);
        let to_nm1 = decomp.state_kernel(&amps, Site::new(n - 1, n)?)?;
        let to_n = decomp.state_kernel(&amps, Site::last(n))?;
        Ok(Self { chain, omega, state, profile, decomp, to_nm1, to_n })
    }

    pub fn profile(&self) -> &FieldProfile {
        &self.profile
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomp
    }

    pub fn record(&self, t: f64) -> EbitRecord {
        let a = self.to_nm1.amplitude(t).norm();
        let b = self.to_n.amplitude(t).norm();
        EbitRecord { time: t, abs_p_nm1: a, abs_p_n: b, concurrence: 2.0 * a * b }
    }

    pub fn series(&self, t_end: f64, step: f64) -> Result<Vec<EbitRecord>> {
        if !(step > 0.0) || !(t_end >= 0.0) {
            return Err(QstError::InvalidParameter(format!("bad grid: t_end={t_end}, step={step}")));
        }
        let count = (t_end / step).floor() as usize + 1;
        let a = self.to_nm1.scan_abs(0.0, step, count);
        let b = self.to_n.scan_abs(0.0, step, count);
        Ok((0..count)
            .map(|i| EbitRecord {
                time: i as f64 * step,
                abs_p_nm1: a[i],
                abs_p_n: b[i],
                concurrence: 2.0 * a[i] * b[i],
            })
            .collect())
    }

    /// Rabi time of single-qubit transfer in the same e-bit profile.
    ///
    /// The end pairs form dimer modes near ±J. Mirror symmetry splits each
    /// into a doublet and the narrower splitting sets the slow time scale.
    pub fn reference_transfer_time(&self) -> Result<f64> {
        let n = self.chain.n_sites();
        let lam = self.decomp.eigenvalues();
        let weight = |k: usize| {
            let v = self.decomp.eigenvector(k);
            v[n - 2] * v[n - 2] + v[n - 1] * v[n - 1]
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)).then(a.cmp(&b)));
        let mut top: Vec<f64> = order[..4].iter().map(|&k| lam[k]).collect();
        top.sort_by(f64::total_cmp);
        let gap = if top[1] < 0.0 && top[2] > 0.0 {
            (top[1] - top[0]).min(top[3] - top[2])
        } else {
            // Weak fields: the doublets are not cleanly separated.
            let mut two = [lam[order[0]], lam[order[1]]];
            two.sort_by(f64::total_cmp);
            two[1] - two[0]
        };
        rabi_time_from_gap(gap)
    }

    /// [0, 3·t_MAX] of single-qubit transfer in the e-bit profile.
    pub fn default_window(&self) -> Result<f64> {
        Ok(3.0 * self.reference_transfer_time()?)
    }

    /// Maximum pair concurrence over [0, window].
    pub fn peak(&self, window: f64, search: &PeakSearch) -> Result<Peak> {
        if !(window > 0.0) {
            return Err(QstError::InvalidParameter(format!("window must be positive, got {window}")));
        }
        let count = search.grid_len(0.0, window);
        let a = self.to_nm1.scan_abs(0.0, search.step, count);
        let b = self.to_n.scan_abs(0.0, search.step, count);
        let grid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x * y).collect();
        Ok(search.refine(0.0, window, &grid, |t| self.record(t).concurrence))
    }
}
