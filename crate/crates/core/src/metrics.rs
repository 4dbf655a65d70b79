//! Figures of merit for end-to-end transfer.

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::{FieldProfile, Site};
use crate::error::{QstError, Result};
use crate::spectral::{AmplitudeKernel, SpectralDecomposition};

/// One sample of the transfer dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferRecord {
    #[serde(rename = "t")]
    pub time: f64,
    pub abs_f: f64,
    pub avg_fidelity: f64,
    pub concurrence: f64,
}

impl TransferRecord {
    pub const CSV_HEADER: &'static str = "t,abs_f,avg_fidelity,concurrence";

    pub fn from_amplitude(time: f64, f: Complex64) -> Self {
        let abs_f = f.norm().min(1.0);
        Self {
            time,
            abs_f,
            avg_fidelity: fidelity_of(abs_f),
            concurrence: concurrence(f),
        }
    }
}

fn fidelity_of(a: f64) -> f64 {
    a / 3.0 + a * a / 6.0 + 0.5
}

/// Input-averaged fidelity |f|/3 + |f|²/6 + 1/2.
pub fn average_fidelity(abs_f: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !(-SLACK..=1.0 + SLACK).contains(&abs_f) {
        return Err(QstError::InvalidParameter(format!("|f| = {abs_f} outside [0, 1]")));
    }
    Ok(fidelity_of(abs_f.clamp(0.0, 1.0)))
}

/// Concurrence between the receiver and an outside qubit that initially
/// shared a Bell pair with the sender.
pub fn concurrence(f: Complex64) -> f64 {
    f.norm().min(1.0)
}

/// Anything with a squared modulus.
pub trait Weight {
    fn weight(&self) -> f64;
}

impl Weight for f64 {
    fn weight(&self) -> f64 {
        self * self
    }
}

impl Weight for Complex64 {
    fn weight(&self) -> f64 {
        self.norm_sqr()
    }
}

/// Inverse participation ratio (Σ|a|²)² / Σ|a|⁴.
pub fn ipr<T: Weight>(vector: &[T]) -> Result<f64> {
    let (s2, s4) = vector.iter().fold((0.0, 0.0), |(s2, s4), a| {
        let w = a.weight();
        (s2 + w, s4 + w * w)
    });
    if s4 == 0.0 {
        return Err(QstError::ZeroVector);
    }
    Ok(s2 * s2 / s4)
}

/// IPRs plus the two distinguished eigenstate pairs of a barrier chain.
/// Pair indices are 0-based positions in ascending-eigenvalue order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub ipr_per_state: Vec<f64>,
    /// States with most weight on the barrier sites 2 and N−1.
    pub barrier_pair: (usize, usize),
    /// Of the rest, states with most weight on sites 1 and N.
    pub bilocalized_pair: (usize, usize),
    pub gap: f64,
}

fn top_two(scores: &[f64], exclude: &[usize]) -> (usize, usize) {
    let mut best: Vec<usize> = (0..scores.len()).filter(|k| !exclude.contains(k)).collect();
    best.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let (a, b) = (best[0], best[1]);
    (a.min(b), a.max(b))
}

pub fn localization_report(decomp: &SpectralDecomposition, profile: &FieldProfile) -> Result<LocalizationReport> {
    let n = decomp.dim();
    if n < 4 {
        return Err(QstError::TooFewSites { required: 4, got: n });
    }
    if profile.len() != n {
        return Err(QstError::LengthMismatch { expected: n, got: profile.len() });
    }
    let ipr_per_state = (0..n).map(|k| ipr(decomp.eigenvector(k))).collect::<Result<Vec<_>>>()?;

    let mass = |a: usize, b: usize| -> Vec<f64> {
        (0..n)
            .map(|k| {
                let v = decomp.eigenvector(k);
                v[a] * v[a] + v[b] * v[b]
            })
            .collect()
    };
    let barrier_pair = top_two(&mass(1, n - 2), &[]);
    let bilocalized_pair = top_two(&mass(0, n - 1), &[barrier_pair.0, barrier_pair.1]);
    let lam = decomp.eigenvalues();
    let gap = lam[bilocalized_pair.1] - lam[bilocalized_pair.0];
    Ok(LocalizationReport { ipr_per_state, barrier_pair, bilocalized_pair, gap })
}

/// Smallest gap the transfer time is computed from.
pub const GAP_FLOOR: f64 = 1e-13;

/// Half period π/Δ of the end-to-end Rabi oscillation.
pub fn rabi_transfer_time(report: &LocalizationReport) -> Result<f64> {
    rabi_time_from_gap(report.gap)
}

pub fn rabi_time_from_gap(gap: f64) -> Result<f64> {
    if !(gap > GAP_FLOOR) {
        return Err(QstError::DegenerateGap(gap));
    }
    Ok(std::f64::consts::PI / gap)
}

/// The two smallest strictly positive eigenvalues, skipping exact zero modes.
/// This is how the bi-localized pair shows up in a spectrum plotted with the
/// opposite field sign.
pub fn positive_pair_near_zero(decomp: &SpectralDecomposition) -> Option<(usize, usize)> {
    const ZERO_MODE: f64 = 1e-9;
    let mut idx = decomp.eigenvalues().iter().enumerate().filter(|(_, &l)| l > ZERO_MODE).map(|(k, _)| k);
    Some((idx.next()?, idx.next()?))
}

/// Grid scan followed by golden-section refinement around the best point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakSearch {
    pub step: f64,
    pub tolerance: f64,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self { step: 0.25, tolerance: 1e-4 }
    }
}

/// A located maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub time: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Grid maxima refined per search.
const CANDIDATES: usize = 8;

/// Refined peaks closer than this count as equal.
pub const TIE: f64 = 1e-8;

impl PeakSearch {
    /// Step min(0.25, t_MAX/200) when a Rabi time is known.
    pub fn for_rabi_time(t_max: Option<f64>) -> Self {
        let step = match t_max {
            Some(t) if t.is_finite() && t > 0.0 => (t / 200.0).min(0.25),
            _ => 0.25,
        };
        Self { step, ..Self::default() }
    }

    /// Number of grid points t = i·step inside [t_start, t_end].
    pub fn grid_len(&self, t_start: f64, t_end: f64) -> usize {
        ((t_end - t_start) / self.step).floor() as usize + 1
    }

    /// Maximizes `f` given its values on the grid.
    ///
    /// The highest few grid-local maxima are each refined by golden section;
    /// refined values equal to within [`TIE`] go to the earliest time.
    pub fn refine<F: Fn(f64) -> f64>(&self, t_start: f64, t_end: f64, grid: &[f64], f: F) -> Peak {
        let len = grid.len();
        let mut candidates: Vec<usize> = (0..len)
            .filter(|&i| (i == 0 || grid[i] >= grid[i - 1]) && (i + 1 == len || grid[i] >= grid[i + 1]))
            .collect();
        candidates.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]).then(a.cmp(&b)));
        candidates.truncate(CANDIDATES);
        candidates.sort_unstable();

        let mut best: Option<Peak> = None;
        for i in candidates {
            let p = self.golden(t_start + i as f64 * self.step, grid[i], t_start, t_end, &f);
            best = match best {
                Some(b) if b.value + TIE >= p.value => Some(b),
                _ => Some(p),
            };
        }
        best.unwrap_or(Peak { time: t_start, value: f(t_start) })
    }

    fn golden<F: Fn(f64) -> f64>(&self, tb: f64, fb: f64, t_start: f64, t_end: f64, f: &F) -> Peak {
        let mut a = (tb - self.step).max(t_start);
        let mut b = (tb + self.step).min(t_end);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > self.tolerance {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = f(d);
            }
        }
        let tm = 0.5 * (a + b);
        let fm = f(tm);
        if fm > fb {
            Peak { time: tm, value: fm }
        } else {
            Peak { time: tb, value: fb }
        }
    }

    /// Maximum of |kernel amplitude| over [0, t_end].
    pub fn maximize_abs(&self, kernel: &AmplitudeKernel, t_end: f64) -> Peak {
        let grid = kernel.scan_abs(0.0, self.step, self.grid_len(0.0, t_end));
        self.refine(0.0, t_end, &grid, |t| kernel.amplitude(t).norm())
    }
}

/// Best average fidelity over Jt ∈ [0, window]. `value` is F̄ at the peak.
pub fn max_fidelity(decomp: &SpectralDecomposition, window: f64, search: &PeakSearch) -> Result<Peak> {
    if !(window > 0.0) {
        return Err(QstError::InvalidParameter(format!("window must be positive, got {window}")));
    }
    let n = decomp.dim();
    let kernel = decomp.transition_kernel(Site::first(), Site::last(n))?;
    let peak = search.maximize_abs(&kernel, window);
    Ok(Peak { time: peak.time, value: fidelity_of(peak.value.min(1.0)) })
}

/// |f_{N1}| and derived quantities on an evenly spaced time grid.
pub fn transfer_series(decomp: &SpectralDecomposition, t_end: f64, step: f64) -> Result<Vec<TransferRecord>> {
    if !(step > 0.0) {
        return Err(QstError::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let n = decomp.dim();
    let kernel = decomp.transition_kernel(Site::first(), Site::last(n))?;
    let count = (t_end / step).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let t = i as f64 * step;
            TransferRecord::from_amplitude(t, kernel.amplitude(t))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{barrier_profile, build_hamiltonian, ChainSpec};
    use crate::spectral::eigendecompose;
    use std::f64::consts::PI;

    fn barrier(n: usize, omega: f64) -> (SpectralDecomposition, FieldProfile) {
        let spec = ChainSpec::uniform(n).unwrap();
        let p = barrier_profile(&spec, omega).unwrap();
        (eigendecompose(&build_hamiltonian(&spec, &p).unwrap()).unwrap(), p)
    }

    #[test]
    fn average_fidelity_examples() {
        assert_eq!(average_fidelity(1.0).unwrap(), 1.0);
        assert_eq!(average_fidelity(0.0).unwrap(), 0.5);
        assert!((average_fidelity(0.5).unwrap() - (1.0 / 6.0 + 1.0 / 24.0 + 0.5)).abs() < 1e-15);
        assert!(average_fidelity(1.5).is_err());
        assert!(average_fidelity(-0.1).is_err());
        assert!(average_fidelity(f64::NAN).is_err());
    }

    #[test]
    fn ipr_examples() {
        assert_eq!(ipr(&[0.0, 0.0, 1.0, 0.0]).unwrap(), 1.0);
        assert!((ipr(&[0.5; 4]).unwrap() - 4.0).abs() < 1e-14);
        let r = 1.0 / 2f64.sqrt();
        assert!((ipr(&[r, r, 0.0, 0.0]).unwrap() - 2.0).abs() < 1e-14);
        // Unnormalized input gives the same value.
        assert!((ipr(&[3.0, 3.0, 0.0]).unwrap() - 2.0).abs() < 1e-14);
        let z = [Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)];
        assert!((ipr(&z).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(ipr(&[0.0, 0.0]).unwrap_err(), QstError::ZeroVector);
    }

    #[test]
    fn rabi_time_examples() {
        let r = LocalizationReport { ipr_per_state: vec![], barrier_pair: (0, 1), bilocalized_pair: (2, 3), gap: PI };
        assert!((rabi_transfer_time(&r).unwrap() - 1.0).abs() < 1e-15);
        let r = LocalizationReport { gap: 0.0, ..r };
        assert!(matches!(rabi_transfer_time(&r), Err(QstError::DegenerateGap(_))));
    }

    #[test]
    fn two_site_peak() {
        let spec = ChainSpec::uniform(2).unwrap();
        let d = eigendecompose(&build_hamiltonian(&spec, &FieldProfile::zeros(2)).unwrap()).unwrap();
        let p = max_fidelity(&d, 10.0, &PeakSearch::default()).unwrap();
        assert!((p.time - PI / 2.0).abs() < 1e-4);
        assert!((p.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn localization_rejects_short_chain() {
        let spec = ChainSpec::uniform(3).unwrap();
        let d = eigendecompose(&build_hamiltonian(&spec, &FieldProfile::zeros(3)).unwrap()).unwrap();
        assert!(localization_report(&d, &FieldProfile::zeros(3)).is_err());
    }

    #[test]
    fn bilocalized_pair_matches_energy_criterion_in_flipped_convention() {
        // Short odd chains (N = 7) and long chains at weak fields are
        // exceptions: there the zero mode or band states carry more end-site
        // weight than the quasi-degenerate pair.
        let cases = (8..=21)
            .flat_map(|n| [2.0, 3.0, 5.0, 10.0, 50.0].map(move |w| (n, w)))
            .chain((22..=40).flat_map(|n| [10.0, 20.0, 50.0].map(move |w| (n, w))));
        for (n, omega) in cases {
            {
                let spec = ChainSpec::uniform(n).unwrap();
                let p = barrier_profile(&spec, omega).unwrap();
                let flipped = eigendecompose(&build_hamiltonian(&spec, &p.negated()).unwrap()).unwrap();
                let report = localization_report(&flipped, &p.negated()).unwrap();
                assert_eq!(Some(report.bilocalized_pair), positive_pair_near_zero(&flipped), "n={n} ω={omega}");
            }
        }
    }

    #[test]
    fn barrier_states_sit_on_barrier_sites() {
        let (d, p) = barrier(18, 50.0);
        let r = localization_report(&d, &p).unwrap();
        // Highest-energy pair in the +2K convention.
        assert_eq!(r.barrier_pair, (16, 17));
        for k in [r.barrier_pair.0, r.barrier_pair.1] {
            assert!((r.ipr_per_state[k] - 2.0).abs() < 0.05);
        }
    }

    #[test]
    fn transfer_series_records_consistent() {
        let (d, _) = barrier(8, 3.0);
        let s = transfer_series(&d, 20.0, 0.5).unwrap();
        assert_eq!(s.len(), 41);
        for r in &s {
            assert_eq!(r.concurrence, r.abs_f);
            assert!((r.avg_fidelity - average_fidelity(r.abs_f).unwrap()).abs() < 1e-15);
        }
    }
}
