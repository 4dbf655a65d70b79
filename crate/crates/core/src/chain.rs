//! Chain geometry, local-field profiles and the single-excitation Hamiltonian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QstError, Result};

/// A 1-based site label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site(usize);

impl Site {
    pub fn new(site: usize, n_sites: usize) -> Result<Self> {
        if site == 0 || site > n_sites {
            return Err(QstError::SiteOutOfRange { site, n_sites });
        }
        Ok(Site(site))
    }

    pub fn first() -> Self {
        Site(1)
    }

    pub fn last(n_sites: usize) -> Self {
        Site(n_sites.max(1))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Zero-based storage offset.
    pub(crate) fn index(self) -> usize {
        self.0 - 1
    }

    pub(crate) fn check(self, n_sites: usize) -> Result<Self> {
        Site::new(self.0, n_sites)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n_sites: usize,
    coupling: f64,
}

impl ChainSpec {
    pub fn new(n_sites: usize, coupling: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(QstError::TooFewSites { required: 2, got: n_sites });
        }
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(QstError::InvalidParameter(format!(
                "coupling must be positive and finite, got {coupling}"
            )));
        }
        Ok(Self { n_sites, coupling })
    }

    /// Chain with J = 1, the energy unit used everywhere else.
    pub fn uniform(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, 1.0)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn is_even(&self) -> bool {
        self.n_sites.is_multiple_of(2)
    }
}

/// Local z-fields K_n, stored for sites 1..=N in order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    fields: Vec<f64>,
}

impl FieldProfile {
    pub fn new(fields: Vec<f64>) -> Result<Self> {
        if let Some((i, k)) = fields.iter().enumerate().find(|(_, k)| !k.is_finite()) {
            return Err(QstError::InvalidParameter(format!("field at site {} is {k}", i + 1)));
        }
        Ok(Self { fields })
    }

    pub fn zeros(n_sites: usize) -> Self {
        Self { fields: vec![0.0; n_sites] }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn field(&self, site: Site) -> Result<f64> {
        let site = site.check(self.len())?;
        Ok(self.fields[site.index()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.fields
    }

    pub fn with_field(mut self, site: Site, value: f64) -> Result<Self> {
        let site = site.check(self.len())?;
        if !value.is_finite() {
            return Err(QstError::InvalidParameter(format!("field value {value}")));
        }
        self.fields[site.index()] = value;
        Ok(self)
    }

    pub(crate) fn add_field(&mut self, site: Site, delta: f64) {
        self.fields[site.index()] += delta;
    }

    /// K_n = K_{N+1-n} for every n.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.fields.len();
        (0..n / 2).all(|i| self.fields[i] == self.fields[n - 1 - i])
    }

    /// The profile with every field flipped, K → −K.
    pub fn negated(&self) -> Self {
        Self { fields: self.fields.iter().map(|k| -k).collect() }
    }

    fn check_len(&self, spec: &ChainSpec) -> Result<()> {
        if self.len() != spec.n_sites() {
            return Err(QstError::LengthMismatch { expected: spec.n_sites(), got: self.len() });
        }
        Ok(())
    }
}

fn two_site_profile(spec: &ChainSpec, omega: f64, sites: [usize; 2], min_sites: usize) -> Result<FieldProfile> {
    let n = spec.n_sites();
    if n < min_sites {
        return Err(QstError::TooFewSites { required: min_sites, got: n });
    }
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(QstError::InvalidParameter(format!("barrier field must be >= 0, got {omega}")));
    }
    let mut fields = vec![0.0; n];
    for s in sites {
        fields[s - 1] = omega;
    }
    Ok(FieldProfile { fields })
}

/// Barriers of height `omega` on sites 2 and N−1.
pub fn barrier_profile(spec: &ChainSpec, omega: f64) -> Result<FieldProfile> {
    let n = spec.n_sites();
    two_site_profile(spec, omega, [2, n.saturating_sub(1).max(2)], 4)
}

/// Barriers on sites 3 and N−2, isolating the (1,2) and (N−1,N) pairs.
pub fn ebit_barrier_profile(spec: &ChainSpec, omega: f64) -> Result<FieldProfile> {
    let n = spec.n_sites();
    two_site_profile(spec, omega, [3, n.saturating_sub(2).max(3)], 6)
}

/// Symmetric tridiagonal matrix of the chain restricted to one flipped spin.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationHamiltonian {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl SingleExcitationHamiltonian {
    pub fn from_parts(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(QstError::TooFewSites { required: 1, got: 0 });
        }
        if off_diagonal.len() + 1 != diagonal.len() {
            return Err(QstError::LengthMismatch {
                expected: diagonal.len() - 1,
                got: off_diagonal.len(),
            });
        }
        if diagonal.iter().chain(&off_diagonal).any(|x| !x.is_finite()) {
            return Err(QstError::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self { diagonal, off_diagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n / 2).all(|i| self.diagonal[i] == self.diagonal[n - 1 - i])
            && (0..(n - 1) / 2).all(|i| self.off_diagonal[i] == self.off_diagonal[n - 2 - i])
    }

    /// Writes H·x into `out`.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = x[i] * self.diagonal[i];
            if i > 0 {
                acc += x[i - 1] * self.off_diagonal[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.off_diagonal[i];
            }
            out[i] = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diagonal[i];
            if i + 1 < n {
                m[i][i + 1] = self.off_diagonal[i];
                m[i + 1][i] = self.off_diagonal[i];
            }
        }
        m
    }
}

/// H^(1)_{nm} = 2 J K_n δ_{nm} − J (δ_{m,n+1} + δ_{m,n−1}).
///
/// The constant vacuum energy −J Σ K_n is dropped, so amplitudes differ from
/// the full-space ones by the phase exp(i J Σ K_n t).
pub fn build_hamiltonian(spec: &ChainSpec, profile: &FieldProfile) -> Result<SingleExcitationHamiltonian> {
    profile.check_len(spec)?;
    let j = spec.coupling();
    let diagonal = profile.as_slice().iter().map(|k| 2.0 * j * k).collect();
    let off_diagonal = vec![-j; spec.n_sites() - 1];
    SingleExcitationHamiltonian::from_parts(diagonal, off_diagonal)
}

/// Text form of a chain plus field profile.
///
/// Either `omega` (with optional `barrier_sites`, default `[2, N-1]`) or an
/// explicit `fields` array must be given.
///
/// ```toml
/// n_sites = 6
/// omega = 10.0
/// barrier_sites = [2, 5]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub n_sites: usize,
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier_sites: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<f64>>,
}

fn default_coupling() -> f64 {
    1.0
}

impl ProfileConfig {
    pub fn from_profile(spec: &ChainSpec, profile: &FieldProfile) -> Self {
        Self {
            n_sites: spec.n_sites(),
            coupling: spec.coupling(),
            omega: None,
            barrier_sites: None,
            fields: Some(profile.as_slice().to_vec()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| QstError::Config(e.to_string()))
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| QstError::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<(ChainSpec, FieldProfile)> {
        let spec = ChainSpec::new(self.n_sites, self.coupling)?;
        let profile = match (&self.fields, self.omega) {
            (Some(_), Some(_)) => {
                return Err(QstError::Config("give either `fields` or `omega`, not both".into()))
            }
            (Some(fields), None) => {
                let p = FieldProfile::new(fields.clone())?;
                p.check_len(&spec)?;
                p
            }
            (None, Some(omega)) => match &self.barrier_sites {
                None => barrier_profile(&spec, omega)?,
                Some(sites) => {
                    let mut p = FieldProfile::zeros(spec.n_sites());
                    for &s in sites {
                        p = p.with_field(Site::new(s, spec.n_sites())?, omega)?;
                    }
                    p
                }
            },
            (None, None) => return Err(QstError::Config("missing `omega` or `fields`".into())),
        };
        Ok((spec, profile))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_profile_examples() {
        let p = barrier_profile(&ChainSpec::uniform(6).unwrap(), 10.0).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 10.0, 0.0, 0.0, 10.0, 0.0]);
        let p = barrier_profile(&ChainSpec::uniform(4).unwrap(), 0.0).unwrap();
        assert_eq!(p.as_slice(), &[0.0; 4]);
        let p = barrier_profile(&ChainSpec::uniform(5).unwrap(), 2.5).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 2.5, 0.0, 2.5, 0.0]);
    }

    #[test]
    fn barrier_profile_rejects_short_chains() {
        let err = barrier_profile(&ChainSpec::uniform(3).unwrap(), 1.0).unwrap_err();
        assert_eq!(err, QstError::TooFewSites { required: 4, got: 3 });
        assert!(barrier_profile(&ChainSpec::uniform(5).unwrap(), -1.0).is_err());
    }

    #[test]
    fn ebit_profile_examples() {
        let p = ebit_barrier_profile(&ChainSpec::uniform(8).unwrap(), 5.0).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.0, 5.0, 0.0, 0.0, 5.0, 0.0, 0.0]);
        let p = ebit_barrier_profile(&ChainSpec::uniform(6).unwrap(), 1.0).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let p = ebit_barrier_profile(&ChainSpec::uniform(7).unwrap(), 0.0).unwrap();
        assert!(p.as_slice().iter().all(|&k| k == 0.0));
        assert!(ebit_barrier_profile(&ChainSpec::uniform(5).unwrap(), 1.0).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let h = build_hamiltonian(&ChainSpec::uniform(3).unwrap(), &FieldProfile::zeros(3)).unwrap();
        assert_eq!(h.diagonal(), &[0.0, 0.0, 0.0]);
        assert_eq!(h.off_diagonal(), &[-1.0, -1.0]);

        let spec = ChainSpec::uniform(4).unwrap();
        let h = build_hamiltonian(&spec, &barrier_profile(&spec, 10.0).unwrap()).unwrap();
        assert_eq!(h.diagonal(), &[0.0, 20.0, 20.0, 0.0]);
        assert_eq!(h.off_diagonal(), &[-1.0, -1.0, -1.0]);

        let spec = ChainSpec::uniform(2).unwrap();
        let h = build_hamiltonian(&spec, &FieldProfile::new(vec![3.0, 0.0]).unwrap()).unwrap();
        assert_eq!(h.diagonal(), &[6.0, 0.0]);
        assert_eq!(h.off_diagonal(), &[-1.0]);
    }

    #[test]
    fn hamiltonian_length_mismatch() {
        let spec = ChainSpec::uniform(4).unwrap();
        let err = build_hamiltonian(&spec, &FieldProfile::zeros(3)).unwrap_err();
        assert_eq!(err, QstError::LengthMismatch { expected: 4, got: 3 });
    }

    #[test]
    fn coupling_scales_whole_matrix() {
        let spec = ChainSpec::new(5, 2.5).unwrap();
        let p = barrier_profile(&spec, 3.0).unwrap();
        let h = build_hamiltonian(&spec, &p).unwrap();
        assert_eq!(h.diagonal()[1], 15.0);
        assert!(h.off_diagonal().iter().all(|&e| e == -2.5));
    }

    #[test]
    fn invalid_chain_specs() {
        assert!(ChainSpec::new(1, 1.0).is_err());
        assert!(ChainSpec::new(4, 0.0).is_err());
        assert!(ChainSpec::new(4, f64::NAN).is_err());
        assert!(FieldProfile::new(vec![0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn site_bounds() {
        assert!(Site::new(0, 4).is_err());
        assert!(Site::new(5, 4).is_err());
        assert_eq!(Site::new(4, 4).unwrap().get(), 4);
        assert_eq!(Site::last(7).get(), 7);
    }

    #[test]
    fn config_block_barrier_and_fields() {
        let cfg = ProfileConfig::parse("n_sites = 6\nomega = 10.0\n").unwrap();
        let (spec, p) = cfg.build().unwrap();
        assert_eq!(spec.n_sites(), 6);
        assert_eq!(p.as_slice(), &[0.0, 10.0, 0.0, 0.0, 10.0, 0.0]);

        let cfg = ProfileConfig::parse("n_sites = 8\nomega = 5.0\nbarrier_sites = [3, 6]\n").unwrap();
        let (_, p) = cfg.build().unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.0, 5.0, 0.0, 0.0, 5.0, 0.0, 0.0]);

        let cfg = ProfileConfig::parse("n_sites = 3\nfields = [1.0, -2.0, 0.5]\n").unwrap();
        let (_, p) = cfg.build().unwrap();
        assert_eq!(p.as_slice(), &[1.0, -2.0, 0.5]);
    }

    #[test]
    fn config_block_errors() {
        assert!(ProfileConfig::parse("n_sites = 4\n").unwrap().build().is_err());
        assert!(ProfileConfig::parse("n_sites = 3\nfields = [1.0]\n").unwrap().build().is_err());
        assert!(ProfileConfig::parse("n_sites = 4\nomega = 1.0\nbarrier_sites = [9]\n")
            .unwrap()
            .build()
            .is_err());
        assert!(ProfileConfig::parse("n_sites = 4\nbogus = 1\n").is_err());
    }

    #[test]
    fn config_block_text_roundtrip() {
        let spec = ChainSpec::new(5, 1.5).unwrap();
        let p = FieldProfile::new(vec![0.25, 3.0, -1.0, 3.0, 0.0]).unwrap();
        let text = ProfileConfig::from_profile(&spec, &p).to_text().unwrap();
        let (spec2, p2) = ProfileConfig::parse(&text).unwrap().build().unwrap();
        assert_eq!(spec, spec2);
        assert_eq!(p, p2);
    }

    #[test]
    fn mirror_symmetry_detection() {
        let spec = ChainSpec::uniform(7).unwrap();
        let p = barrier_profile(&spec, 4.0).unwrap();
        assert!(p.is_mirror_symmetric());
        assert!(build_hamiltonian(&spec, &p).unwrap().is_mirror_symmetric());
        let q = p.with_field(Site::new(3, 7).unwrap(), 0.1).unwrap();
        assert!(!q.is_mirror_symmetric());
        assert!(!build_hamiltonian(&spec, &q).unwrap().is_mirror_symmetric());
    }
}
