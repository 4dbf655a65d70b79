//! Three-stage transfer protocol with time-dependent barrier fields.
//!
//! 1. t0 ≤ t < t1: a strong field K₁ on site 2 freezes the excitation on the
//!    sender.
//! 2. t1 ≤ t < t2: both barriers carry K₂ and the excitation tunnels across.
//! 3. t ≥ t2: the field moves to site N−1 and traps the excitation on the
//!    receiver.
//!
//! The drive follows i dβ_j/dt = −β_{j−1} − ω_j(t) β_j − β_{j+1} (units of J),
//! so a field here enters the diagonal as −ω rather than the 2K of the
//! static chain Hamiltonian. With this convention the middle-stage gap gives
//! the quoted intervals (π/2)K₂² for even N and (π/4)(N−3)K₂ for odd N.
//!
//! Sharp switching is simulated segment by segment with the spectral
//! propagator. Logistic switching is integrated with RK4 inside windows of
//! ±[`TAIL`]·τ around t1 and t2, where the fields still change, and
//! propagated exactly elsewhere. The RK4 step is halved until the final F̄
//! moves by less than [`STEP_TOLERANCE`] and the norm is within
//! [`NORM_TOLERANCE`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, SingleExcitationHamiltonian, Site};
use crate::error::{QstError, Result};
use crate::integrate::DrivenTridiagonal;
use crate::metrics::{average_fidelity, Peak, PeakSearch};
use crate::spectral::{eigendecompose, SpectralDecomposition};

/// Half-width of an integration window in units of the switching timescale.
/// The logistic tail beyond it is below e^{−40}.
pub const TAIL: f64 = 40.0;

/// Final-fidelity change below which a step size is accepted.
pub const STEP_TOLERANCE: f64 = 1e-8;

/// Largest norm error accepted at the end of an integrated run.
pub const NORM_TOLERANCE: f64 = 1e-8;

const MAX_HALVINGS: usize = 10;

/// Default waiting time before the transfer stage.
pub const DEFAULT_T1: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Switching {
    /// Ideal step functions.
    Step,
    /// Logistic ramps 1/(e^{(t−t_i)/τ} + 1) with switching time τ = 1/α.
    Logistic { timescale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingSchedule {
    pub k1: f64,
    pub k2: f64,
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub switching: Switching,
}

/// 1/(e^x + 1) without overflow.
fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (x.exp() + 1.0)
    }
}

impl SwitchingSchedule {
    pub fn new(k1: f64, k2: f64, t0: f64, t1: f64, t2: f64, switching: Switching) -> Result<Self> {
        for (name, v) in [("k1", k1), ("k2", k2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(QstError::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(t0.is_finite() && t1.is_finite() && t2.is_finite() && t0 <= t1 && t1 < t2) {
            return Err(QstError::InvalidParameter(format!("need t0 <= t1 < t2, got {t0}, {t1}, {t2}")));
        }
        if let Switching::Logistic { timescale } = switching {
            if !(timescale.is_finite() && timescale > 0.0) {
                return Err(QstError::InvalidParameter(format!("switching timescale must be positive, got {timescale}")));
            }
        }
        Ok(Self { k1, k2, t0, t1, t2, switching })
    }

    /// t0 = 0, t1 = [`DEFAULT_T1`], t2 = t1 + Δt.
    pub fn with_interval(k1: f64, k2: f64, interval: f64, switching: Switching) -> Result<Self> {
        Self::new(k1, k2, 0.0, DEFAULT_T1, DEFAULT_T1 + interval, switching)
    }

    pub fn interval(&self) -> f64 {
        self.t2 - self.t1
    }

    /// ω₂(t).
    pub fn omega_sender(&self, t: f64) -> f64 {
        match self.switching {
            Switching::Step => {
                if t < self.t1 {
                    self.k1
                } else if t < self.t2 {
                    self.k2
                } else {
                    0.0
                }
            }
            Switching::Logistic { timescale } => {
                self.k2 * fermi((t - self.t2) / timescale) + (self.k1 - self.k2) * fermi((t - self.t1) / timescale)
            }
        }
    }

    /// ω_{N−1}(t).
    pub fn omega_receiver(&self, t: f64) -> f64 {
        match self.switching {
            Switching::Step => {
                if t < self.t1 {
                    0.0
                } else if t < self.t2 {
                    self.k2
                } else {
                    self.k1
                }
            }
            Switching::Logistic { timescale } => {
                self.k2 * fermi(-(t - self.t1) / timescale) + (self.k1 - self.k2) * fermi(-(t - self.t2) / timescale)
            }
        }
    }

    /// Field on `site`, which must be 2 or N−1.
    pub fn field_at(&self, site: Site, n_sites: usize, t: f64) -> Result<f64> {
        if n_sites < 4 {
            return Err(QstError::TooFewSites { required: 4, got: n_sites });
        }
        if t < self.t0 {
            return Err(QstError::InvalidParameter(format!("t = {t} precedes t0 = {}", self.t0)));
        }
        match site.get() {
            2 => Ok(self.omega_sender(t)),
            s if s == n_sites - 1 => Ok(self.omega_receiver(t)),
            s => Err(QstError::SiteOutOfRange { site: s, n_sites }),
        }
    }

    fn diagonal_into(&self, t: f64, out: &mut [f64]) {
        let n = out.len();
        out.fill(0.0);
        out[1] = -self.omega_sender(t);
        out[n - 2] -= self.omega_receiver(t);
    }

    /// Constant stages as (start, sender field, receiver field). Under
    /// logistic switching the fields are the asymptotic plateau values.
    fn stages(&self) -> [(f64, f64, f64); 3] {
        [(self.t0, self.k1, 0.0), (self.t1, self.k2, self.k2), (self.t2, 0.0, self.k1)]
    }
}

/// Δt = (π/2)K₂² for even N, (π/4)(N−3)K₂ for odd N.
pub fn optimal_interval(n_sites: usize, k2: f64) -> Result<f64> {
    if n_sites < 4 {
        return Err(QstError::TooFewSites { required: 4, got: n_sites });
    }
    if !(k2.is_finite() && k2 > 0.0) {
        return Err(QstError::InvalidParameter(format!("k2 must be positive, got {k2}")));
    }
    let pi = std::f64::consts::PI;
    Ok(if n_sites.is_multiple_of(2) { 0.5 * pi * k2 * k2 } else { 0.25 * pi * (n_sites - 3) as f64 * k2 })
}

fn stage_hamiltonian(chain: &ChainSpec, sender: f64, receiver: f64) -> Result<SingleExcitationHamiltonian> {
    let n = chain.n_sites();
    let mut d = vec![0.0; n];
    d[1] = -sender;
    d[n - 2] -= receiver;
    SingleExcitationHamiltonian::from_parts(d, vec![-chain.coupling(); n - 1])
}

fn localized_first(n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

fn propagate_spectral(decomp: &SpectralDecomposition, coeffs: &[Complex64], dt: f64) -> Vec<Complex64> {
    let n = decomp.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -decomp.eigenvalues()[k] * dt) * c;
        for (o, a) in out.iter_mut().zip(decomp.eigenvector(k)) {
            *o += phase * a;
        }
    }
    out
}

/// Numerically optimal Δt: the maximum of |β_N(t2)| for Δt within
/// [0.5, 1.5]·`seed`, with sharp switching.
pub fn optimal_interval_numeric(chain: &ChainSpec, k1: f64, k2: f64, t1: f64, seed: f64) -> Result<Peak> {
    if !(seed.is_finite() && seed > 0.0) {
        return Err(QstError::InvalidParameter(format!("seed interval must be positive, got {seed}")));
    }
    if !(t1.is_finite() && t1 >= 0.0) {
        return Err(QstError::InvalidParameter(format!("t1 must be >= 0, got {t1}")));
    }
    let n = chain.n_sites();
    if n < 4 {
        return Err(QstError::TooFewSites { required: 4, got: n });
    }
    let pre = eigendecompose(&stage_hamiltonian(chain, k1, 0.0)?)?;
    let at_t1 = propagate_spectral(&pre, &pre.project(&localized_first(n)), t1);
    let mid = eigendecompose(&stage_hamiltonian(chain, k2, k2)?)?;
    let kernel = mid.state_kernel(&at_t1, Site::last(n))?;

    let search = PeakSearch::default();
    let (lo, hi) = (0.5 * seed, 1.5 * seed);
    let grid = kernel.scan_abs(lo, search.step, search.grid_len(lo, hi));
    let peak = search.refine(lo, hi, &grid, |dt| kernel.amplitude(dt).norm());
    Ok(Peak { time: peak.time, value: average_fidelity(peak.value.min(1.0))? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolSample {
    #[serde(rename = "t")]
    pub time: f64,
    pub omega2: f64,
    #[serde(rename = "omegaNm1")]
    pub omega_nm1: f64,
    pub abs_f: f64,
    pub avg_fidelity: f64,
    /// |β_1|².
    pub survival: f64,
    pub norm: f64,
}

impl ProtocolSample {
    pub const CSV_HEADER: &'static str = "t,omega2,omegaNm1,abs_f,avg_fidelity";
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolRun {
    pub schedule: SwitchingSchedule,
    pub n_sites: usize,
    /// RK4 step accepted by the halving test; `None` for sharp switching.
    pub step_size: Option<f64>,
    pub samples: Vec<ProtocolSample>,
    pub final_time: f64,
    pub final_amplitudes: Vec<Complex64>,
}

impl ProtocolRun {
    pub fn final_fidelity(&self) -> f64 {
        let f = self.final_amplitudes.last().map_or(0.0, |a| a.norm()).min(1.0);
        f / 3.0 + f * f / 6.0 + 0.5
    }

    /// Largest F̄ over the recorded samples.
    pub fn achievable_fidelity(&self) -> f64 {
        self.samples.iter().map(|s| s.avg_fidelity).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest |β_1|² over samples with t < t1.
    pub fn min_presend_survival(&self) -> Option<f64> {
        self.samples
            .iter()
            .filter(|s| s.time < self.schedule.t1)
            .map(|s| s.survival)
            .reduce(f64::min)
    }

    /// Largest |‖β‖ − 1| over samples.
    pub fn max_norm_error(&self) -> f64 {
        self.samples.iter().map(|s| (s.norm - 1.0).abs()).fold(0.0, f64::max)
    }
}

enum Piece {
    Constant { start: f64, end: f64, sender: f64, receiver: f64 },
    Driven { start: f64, end: f64 },
}

fn pieces(schedule: &SwitchingSchedule, t_end: f64) -> Vec<Piece> {
    let stages = schedule.stages();
    let mut out = Vec::new();
    match schedule.switching {
        Switching::Step => {
            for (i, &(start, s, r)) in stages.iter().enumerate() {
                let end = stages.get(i + 1).map_or(t_end, |x| x.0).min(t_end);
                if end > start {
                    out.push(Piece::Constant { start, end, sender: s, receiver: r });
                }
            }
        }
        Switching::Logistic { timescale } => {
            let w = TAIL * timescale;
            let mut windows: Vec<(f64, f64)> = Vec::new();
            for centre in [schedule.t1, schedule.t2] {
                let (a, b) = ((centre - w).max(schedule.t0), (centre + w).min(t_end));
                if b <= a {
                    continue;
                }
                match windows.last_mut() {
                    Some(last) if a <= last.1 => last.1 = last.1.max(b),
                    _ => windows.push((a, b)),
                }
            }
            // Plateau for a constant gap: the stage whose start is the latest
            // one not after the gap start.
            let plateau = |t: f64| {
                let &(_, s, r) = stages.iter().rev().find(|x| x.0 <= t).unwrap_or(&stages[0]);
                (s, r)
            };
            let mut cursor = schedule.t0;
            for (a, b) in windows {
                if a > cursor {
                    let (s, r) = plateau(0.5 * (cursor + a));
                    out.push(Piece::Constant { start: cursor, end: a, sender: s, receiver: r });
                }
                out.push(Piece::Driven { start: a, end: b });
                cursor = b;
            }
            if t_end > cursor {
                let (s, r) = plateau(0.5 * (cursor + t_end));
                out.push(Piece::Constant { start: cursor, end: t_end, sender: s, receiver: r });
            }
        }
    }
    out
}

fn sample_of(schedule: &SwitchingSchedule, t: f64, state: &[Complex64]) -> Result<ProtocolSample> {
    let n = state.len();
    let abs_f = state[n - 1].norm();
    Ok(ProtocolSample {
        time: t,
        omega2: schedule.omega_sender(t),
        omega_nm1: schedule.omega_receiver(t),
        abs_f,
        avg_fidelity: average_fidelity(abs_f.min(1.0))?,
        survival: state[0].norm_sqr(),
        norm: state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt(),
    })
}

/// One pass over the timeline, recording `sample_times` (sorted, inside
/// [t0, t_end]). Returns the samples and the state at `t_end`.
fn run_once(
    chain: &ChainSpec,
    schedule: &SwitchingSchedule,
    t_end: f64,
    sample_times: &[f64],
    h: f64,
) -> Result<(Vec<ProtocolSample>, Vec<Complex64>)> {
    let n = chain.n_sites();
    let mut state = localized_first(n);
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut next = 0;
    while next < sample_times.len() && sample_times[next] <= schedule.t0 {
        samples.push(sample_of(schedule, sample_times[next], &state)?);
        next += 1;
    }

    for piece in pieces(schedule, t_end) {
        match piece {
            Piece::Constant { start, end, sender, receiver } => {
                let decomp = eigendecompose(&stage_hamiltonian(chain, sender, receiver)?)?;
                let coeffs = decomp.project(&state);
                while next < sample_times.len() && sample_times[next] <= end {
                    let t = sample_times[next];
                    samples.push(sample_of(schedule, t, &propagate_spectral(&decomp, &coeffs, t - start))?);
                    next += 1;
                }
                state = propagate_spectral(&decomp, &coeffs, end - start);
            }
            Piece::Driven { start, end } => {
                let coupling = chain.coupling();
                let mut sys = DrivenTridiagonal::new(vec![-coupling; n - 1], |t, d: &mut [f64]| {
                    schedule.diagonal_into(t, d)
                });
                let mut t = start;
                loop {
                    let target = if next < sample_times.len() && sample_times[next] <= end { sample_times[next] } else { end };
                    let steps = ((target - t) / h).ceil() as usize;
                    sys.propagate(&mut state, t, target, steps);
                    t = target;
                    if next < sample_times.len() && sample_times[next] <= end {
                        samples.push(sample_of(schedule, t, &state)?);
                        next += 1;
                    } else {
                        break;
                    }
                }
            }
        }
    }
    Ok((samples, state))
}

/// Simulates the protocol from |1⟩ at t0 to `t_end`, sampling every
/// `sample_step` (t1 and t2 are always sampled).
pub fn simulate_protocol(chain: &ChainSpec, schedule: &SwitchingSchedule, t_end: f64, sample_step: f64) -> Result<ProtocolRun> {
    let n = chain.n_sites();
    if n < 4 {
        return Err(QstError::TooFewSites { required: 4, got: n });
    }
    if !(t_end.is_finite() && t_end >= schedule.t0) {
        return Err(QstError::InvalidParameter(format!("t_end = {t_end} precedes t0 = {}", schedule.t0)));
    }
    if !(sample_step.is_finite() && sample_step > 0.0) {
        return Err(QstError::InvalidParameter(format!("sample step must be positive, got {sample_step}")));
    }

    let count = ((t_end - schedule.t0) / sample_step).floor() as usize + 1;
    let mut times: Vec<f64> = (0..count).map(|i| schedule.t0 + i as f64 * sample_step).collect();
    times.extend([schedule.t1, schedule.t2].into_iter().filter(|&t| t <= t_end));
    times.sort_by(f64::total_cmp);
    times.dedup();

    let step_size = match schedule.switching {
        Switching::Step => None,
        Switching::Logistic { timescale } => Some(converged_step(chain, schedule, t_end, timescale)?),
    };
    let (samples, final_amplitudes) = run_once(chain, schedule, t_end, &times, step_size.unwrap_or(1.0))?;
    Ok(ProtocolRun { schedule: *schedule, n_sites: n, step_size, samples, final_time: t_end, final_amplitudes })
}

fn converged_step(chain: &ChainSpec, schedule: &SwitchingSchedule, t_end: f64, timescale: f64) -> Result<f64> {
    // (final F̄, |‖β‖ − 1|) at step h.
    let final_f = |h: f64| -> Result<(f64, f64)> {
        let (_, state) = run_once(chain, schedule, t_end, &[], h)?;
        let norm = state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Ok((average_fidelity(state[state.len() - 1].norm().min(1.0))?, (norm - 1.0).abs()))
    };
    let mut h = (0.1 * timescale).min(0.01);
    let mut prev = final_f(h)?;
    for _ in 0..MAX_HALVINGS {
        let cur = final_f(0.5 * h)?;
        h *= 0.5;
        if (cur.0 - prev.0).abs() < STEP_TOLERANCE && cur.1 < NORM_TOLERANCE {
            return Ok(h);
        }
        prev = cur;
    }
    Err(QstError::NonConvergent(format!("RK4 step not accepted down to h = {h}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StorageFidelity {
    pub mean: f64,
    /// max |F̄ − mean| over the window.
    pub drift: f64,
    pub samples: usize,
}

/// Mean and drift of F̄ over samples with t ∈ [t2, t2 + window].
pub fn storage_fidelity(run: &ProtocolRun, window: f64) -> Result<StorageFidelity> {
    let t2 = run.schedule.t2;
    if !(window >= 0.0) || t2 + window > run.final_time {
        return Err(QstError::InvalidParameter(format!(
            "storage window [{t2}, {}] exceeds the run (ends at {})",
            t2 + window,
            run.final_time
        )));
    }
    let values: Vec<f64> = run
        .samples
        .iter()
        .filter(|s| s.time >= t2 && s.time <= t2 + window)
        .map(|s| s.avg_fidelity)
        .collect();
    if values.is_empty() {
        return Err(QstError::InvalidParameter("no samples inside the storage window".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let drift = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    Ok(StorageFidelity { mean, drift, samples: values.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::transition_amplitude;
    use std::f64::consts::PI;

    fn steps(k1: f64, k2: f64, dt: f64) -> SwitchingSchedule {
        SwitchingSchedule::with_interval(k1, k2, dt, Switching::Step).unwrap()
    }

    #[test]
    fn step_fields() {
        let s = SwitchingSchedule::new(60.0, 30.0, 0.0, 50.0, 100.0, Switching::Step).unwrap();
        let n = 30;
        let two = Site::new(2, n).unwrap();
        let nm1 = Site::new(n - 1, n).unwrap();
        assert_eq!(s.field_at(two, n, 10.0).unwrap(), 60.0);
        assert_eq!(s.field_at(nm1, n, 10.0).unwrap(), 0.0);
        assert_eq!(s.field_at(two, n, 50.0).unwrap(), 30.0);
        assert_eq!(s.field_at(nm1, n, 75.0).unwrap(), 30.0);
        assert_eq!(s.field_at(two, n, 100.0).unwrap(), 0.0);
        assert_eq!(s.field_at(nm1, n, 100.0).unwrap(), 60.0);
        assert!(s.field_at(Site::new(5, n).unwrap(), n, 1.0).is_err());
        assert!(s.field_at(two, n, -1.0).is_err());
    }

    #[test]
    fn logistic_limits() {
        let s = SwitchingSchedule::new(60.0, 30.0, -1e4, 0.0, 100.0, Switching::Logistic { timescale: 1.0 }).unwrap();
        assert!((s.omega_sender(-1e3) - 60.0).abs() < 1e-12);
        assert!(s.omega_receiver(-1e3).abs() < 1e-12);
        assert!((s.omega_sender(50.0) - 30.0).abs() < 1e-12);
        assert!((s.omega_receiver(50.0) - 30.0).abs() < 1e-12);
        assert!(s.omega_sender(1e3).abs() < 1e-12);
        assert!((s.omega_receiver(1e3) - 60.0).abs() < 1e-12);
        assert!((s.omega_sender(0.0) - 45.0).abs() < 1e-9);
    }

    #[test]
    fn schedule_validation() {
        assert!(SwitchingSchedule::new(1.0, 1.0, 0.0, 5.0, 5.0, Switching::Step).is_err());
        assert!(SwitchingSchedule::new(1.0, 1.0, 6.0, 5.0, 9.0, Switching::Step).is_err());
        assert!(SwitchingSchedule::new(-1.0, 1.0, 0.0, 5.0, 9.0, Switching::Step).is_err());
        assert!(SwitchingSchedule::new(1.0, 1.0, 0.0, 5.0, 9.0, Switching::Logistic { timescale: 0.0 }).is_err());
    }

    #[test]
    fn closed_form_intervals() {
        assert!((optimal_interval(30, 30.0).unwrap() - 450.0 * PI).abs() < 1e-9);
        assert!((optimal_interval(23, 30.0).unwrap() - 150.0 * PI).abs() < 1e-9);
        assert!(optimal_interval(30, 0.0).is_err());
    }

    #[test]
    fn degenerate_schedule_matches_single_shot() {
        let n = 12;
        let chain = ChainSpec::uniform(n).unwrap();
        let s = SwitchingSchedule::new(0.0, 0.0, 0.0, 7.3, 19.1, Switching::Step).unwrap();
        let run = simulate_protocol(&chain, &s, 40.0, 0.7).unwrap();
        let d = eigendecompose(&stage_hamiltonian(&chain, 0.0, 0.0).unwrap()).unwrap();
        for smp in &run.samples {
            let f = transition_amplitude(&d, Site::first(), Site::last(n), smp.time).unwrap();
            assert!((smp.abs_f - f.norm()).abs() < 1e-10, "t={}", smp.time);
        }
    }

    #[test]
    fn sharp_run_conserves_norm() {
        let chain = ChainSpec::uniform(10).unwrap();
        let run = simulate_protocol(&chain, &steps(20.0, 6.0, 30.0), 200.0, 1.0).unwrap();
        assert!(run.max_norm_error() < 1e-10);
        assert!(run.samples.iter().any(|s| s.time == run.schedule.t1));
        assert!(run.samples.iter().any(|s| s.time == run.schedule.t2));
    }

    #[test]
    fn sharp_logistic_approaches_steps() {
        let chain = ChainSpec::uniform(8).unwrap();
        let dt = optimal_interval_numeric(&chain, 20.0, 5.0, DEFAULT_T1, optimal_interval(8, 5.0).unwrap()).unwrap().time;
        let sharp = simulate_protocol(&chain, &steps(20.0, 5.0, dt), 150.0 + dt, 1.0).unwrap();
        let sched = SwitchingSchedule::with_interval(20.0, 5.0, dt, Switching::Logistic { timescale: 0.01 }).unwrap();
        let smooth = simulate_protocol(&chain, &sched, 150.0 + dt, 1.0).unwrap();
        assert!((sharp.final_fidelity() - smooth.final_fidelity()).abs() <= 1e-3);
        assert!(smooth.max_norm_error() < 1e-8);
    }

    #[test]
    fn storage_window_edge_cases() {
        let chain = ChainSpec::uniform(10).unwrap();
        let run = simulate_protocol(&chain, &steps(20.0, 6.0, 30.0), 150.0, 0.5).unwrap();
        let zero = storage_fidelity(&run, 0.0).unwrap();
        assert_eq!(zero.drift, 0.0);
        assert_eq!(zero.samples, 1);
        assert!(storage_fidelity(&run, 1000.0).is_err());
        assert!(storage_fidelity(&run, -1.0).is_err());
    }

    #[test]
    fn no_trap_means_no_storage() {
        let n = 10;
        let chain = ChainSpec::uniform(n).unwrap();
        let dt = optimal_interval_numeric(&chain, 20.0, 4.0, DEFAULT_T1, optimal_interval(n, 4.0).unwrap()).unwrap().time;
        let trapped = simulate_protocol(&chain, &steps(20.0, 4.0, dt), DEFAULT_T1 + dt + 200.0, 0.5).unwrap();
        let loose = simulate_protocol(&chain, &steps(0.0, 4.0, dt), DEFAULT_T1 + dt + 200.0, 0.5).unwrap();
        assert!(storage_fidelity(&trapped, 200.0).unwrap().drift < 0.05);
        assert!(storage_fidelity(&loose, 200.0).unwrap().drift > 0.1);
    }
}
