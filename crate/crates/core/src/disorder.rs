//! Static field disorder and seeded Monte Carlo averages of transfer quality.
//!
//! Every sample draws from its own ChaCha8 stream keyed by (seed, sample
//! index), and per-sample results are reduced in index order, so the
//! ensemble mean is bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{barrier_profile, build_hamiltonian, ChainSpec, FieldProfile, Site};
use crate::error::{QstError, Result};
use crate::metrics::{localization_report, rabi_transfer_time, PeakSearch};
use crate::spectral::eigendecompose;

/// Recorded next to every ensemble result.
pub const GENERATOR: &str = "ChaCha8Rng::seed_from_u64(seed), stream = sample index";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DisorderModel {
    /// K_n ~ U(−b, b) on sites 3..=N−2.
    BulkUniform { strength: f64 },
    /// K ~ U(0, ω/10) on sites 3 and N−2, K ~ U(0, ω/40) on sites 4 and N−3.
    BarrierLeakage { omega: f64 },
}

impl DisorderModel {
    fn validate(&self) -> Result<()> {
        let v = match *self {
            DisorderModel::BulkUniform { strength } => strength,
            DisorderModel::BarrierLeakage { omega } => omega,
        };
        if !(v.is_finite() && v >= 0.0) {
            return Err(QstError::InvalidParameter(format!("disorder scale must be >= 0, got {v}")));
        }
        Ok(())
    }

    /// Perturbed sites (1-based) with the half-open interval each is drawn from.
    pub fn affected_sites(&self, n_sites: usize) -> Result<Vec<(usize, f64, f64)>> {
        self.validate()?;
        match *self {
            DisorderModel::BulkUniform { strength } => {
                if n_sites < 5 {
                    return Err(QstError::TooFewSites { required: 5, got: n_sites });
                }
                Ok((3..=n_sites - 2).map(|s| (s, -strength, strength)).collect())
            }
            DisorderModel::BarrierLeakage { omega } => {
                if n_sites < 8 {
                    return Err(QstError::TooFewSites { required: 8, got: n_sites });
                }
                let near = omega / 10.0;
                let next = omega / 40.0;
                Ok(vec![(3, 0.0, near), (4, 0.0, next), (n_sites - 3, 0.0, next), (n_sites - 2, 0.0, near)])
            }
        }
    }
}

fn sample_rng(seed: u64, sample_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_index);
    rng
}

/// `base` plus one disorder realization; a pure function of
/// (model, base, sample_index, seed).
pub fn sample_profile(model: &DisorderModel, base: &FieldProfile, sample_index: u64, seed: u64) -> Result<FieldProfile> {
    let n = base.len();
    let sites = model.affected_sites(n)?;
    let mut rng = sample_rng(seed, sample_index);
    let mut out = base.clone();
    for (site, lo, hi) in sites {
        if hi > lo {
            let k = rng.random_range(lo..hi);
            out.add_field(Site::new(site, n)?, k);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleMetric {
    MaxConcurrence,
    MaxFidelity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub n_samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub generator: &'static str,
    pub search: PeakSearch,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_sample: Option<Vec<f64>>,
}

/// Window maximum of a transfer metric averaged over disorder realizations.
#[derive(Debug, Clone)]
pub struct MonteCarlo {
    pub metric: EnsembleMetric,
    pub model: DisorderModel,
    pub chain: ChainSpec,
    pub omega: f64,
    pub window: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub keep_samples: bool,
}

impl MonteCarlo {
    pub fn run(&self) -> Result<EnsembleResult> {
        if self.n_samples == 0 {
            return Err(QstError::InvalidParameter("n_samples must be >= 1".into()));
        }
        if !(self.window > 0.0) {
            return Err(QstError::InvalidParameter(format!("window must be positive, got {}", self.window)));
        }
        let base = barrier_profile(&self.chain, self.omega)?;
        self.model.affected_sites(self.chain.n_sites())?;
        let search = self.search_for(&base)?;
        let n = self.chain.n_sites();

        let values = (0..self.n_samples as u64)
            .into_par_iter()
            .map(|i| {
                let profile = sample_profile(&self.model, &base, i, self.seed)?;
                let decomp = eigendecompose(&build_hamiltonian(&self.chain, &profile)?)?;
                let kernel = decomp.transition_kernel(Site::first(), Site::last(n))?;
                let best = search.maximize_abs(&kernel, self.window).value.min(1.0);
                Ok(match self.metric {
                    EnsembleMetric::MaxConcurrence => best,
                    EnsembleMetric::MaxFidelity => best / 3.0 + best * best / 6.0 + 0.5,
                })
            })
            .collect::<Result<Vec<f64>>>()?;

        let (mean, std_error) = mean_and_stderr(&values);
        Ok(EnsembleResult {
            n_samples: self.n_samples,
            seed: self.seed,
            mean,
            std_error,
            generator: GENERATOR,
            search,
            per_sample: self.keep_samples.then_some(values),
        })
    }

    /// Grid resolution pinned by the clean chain so every sample uses the same one.
    fn search_for(&self, base: &FieldProfile) -> Result<PeakSearch> {
        let t_max = if self.chain.n_sites() >= 4 && self.omega > 0.0 {
            let decomp = eigendecompose(&build_hamiltonian(&self.chain, base)?)?;
            localization_report(&decomp, base).ok().and_then(|r| rabi_transfer_time(&r).ok())
        } else {
            None
        };
        Ok(PeakSearch::for_rabi_time(t_max))
    }
}

/// Convenience wrapper around [`MonteCarlo::run`].
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo(
    metric: EnsembleMetric,
    model: DisorderModel,
    chain: ChainSpec,
    omega: f64,
    window: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EnsembleResult> {
    MonteCarlo { metric, model, chain, omega, window, n_samples, seed, keep_samples: false }.run()
}

fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 8 {
        x.iter().sum()
    } else {
        let mid = x.len() / 2;
        pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
    }
}

/// Mean and standard error (sample standard deviation over √n).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n: usize, omega: f64) -> FieldProfile {
        barrier_profile(&ChainSpec::uniform(n).unwrap(), omega).unwrap()
    }

    #[test]
    fn zero_strength_is_identity() {
        let b = base(10, 20.0);
        let m = DisorderModel::BulkUniform { strength: 0.0 };
        for i in 0..5 {
            assert_eq!(sample_profile(&m, &b, i, 42).unwrap(), b);
        }
    }

    #[test]
    fn bulk_fields_in_range_and_ends_untouched() {
        let n = 12;
        let b = base(n, 20.0);
        let m = DisorderModel::BulkUniform { strength: 2.0 };
        for i in 0..200 {
            let p = sample_profile(&m, &b, i, 7).unwrap();
            let k = p.as_slice();
            assert_eq!((k[0], k[1], k[n - 2], k[n - 1]), (0.0, 20.0, 20.0, 0.0));
            for &x in &k[2..n - 2] {
                assert!(x > -2.0 && x < 2.0);
            }
        }
    }

    #[test]
    fn leakage_bounds() {
        let n = 10;
        let b = base(n, 40.0);
        let m = DisorderModel::BarrierLeakage { omega: 40.0 };
        for i in 0..200 {
            let k = sample_profile(&m, &b, i, 3).unwrap().as_slice().to_vec();
            for s in [3, n - 2] {
                assert!((0.0..4.0).contains(&k[s - 1]));
            }
            for s in [4, n - 3] {
                assert!((0.0..1.0).contains(&k[s - 1]));
            }
            assert_eq!(k[0], 0.0);
            assert_eq!(k[1], 40.0);
            assert_eq!(k[4], 0.0);
        }
    }

    #[test]
    fn samples_are_deterministic_and_distinct() {
        let b = base(10, 20.0);
        let m = DisorderModel::BulkUniform { strength: 1.0 };
        let a = sample_profile(&m, &b, 5, 99).unwrap();
        assert_eq!(a, sample_profile(&m, &b, 5, 99).unwrap());
        assert_ne!(a, sample_profile(&m, &b, 6, 99).unwrap());
        assert_ne!(a, sample_profile(&m, &b, 5, 100).unwrap());
    }

    #[test]
    fn too_small_chains_rejected() {
        assert!(DisorderModel::BulkUniform { strength: 1.0 }.affected_sites(4).is_err());
        assert!(DisorderModel::BarrierLeakage { omega: 1.0 }.affected_sites(7).is_err());
        assert!(DisorderModel::BulkUniform { strength: -1.0 }.affected_sites(10).is_err());
    }

    #[test]
    fn single_clean_sample_equals_clean_value() {
        let chain = ChainSpec::uniform(8).unwrap();
        let r = monte_carlo(
            EnsembleMetric::MaxConcurrence,
            DisorderModel::BulkUniform { strength: 0.0 },
            chain,
            4.0,
            500.0,
            1,
            11,
        )
        .unwrap();
        let p = barrier_profile(&chain, 4.0).unwrap();
        let d = eigendecompose(&build_hamiltonian(&chain, &p).unwrap()).unwrap();
        let k = d.transition_kernel(Site::first(), Site::last(8)).unwrap();
        assert_eq!(r.mean, r.search.maximize_abs(&k, 500.0).value);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn stderr_formula() {
        let (m, s) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
