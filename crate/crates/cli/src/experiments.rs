use qst_core::disorder::{DisorderModel, EnsembleMetric, EnsembleResult, MonteCarlo, GENERATOR};
use qst_core::ebit::{EbitChannel, EbitRecord, EbitState};
use qst_core::effective::{predicted_vs_exact_gap, GapComparison};
use qst_core::metrics::transfer_series;
use qst_core::oracle::run_checks;
use qst_core::protocol::{
    optimal_interval, optimal_interval_numeric, simulate_protocol, storage_fidelity, ProtocolSample, Switching,
    SwitchingSchedule,
};
use qst_core::*;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::output::{geomspace, linspace, Output};

pub struct Outcome {
    /// File name (without extension) of the JSON summary.
    pub stem: String,
    pub results: Value,
    /// Extra lines for the human-readable report.
    pub lines: Vec<String>,
    /// Set when the experiment ran but its checks did not pass.
    pub failed: Option<String>,
}

impl Outcome {
    fn new(stem: String, results: Value) -> Self {
        Self { stem, results, lines: Vec::new(), failed: None }
    }
}

fn check_range(name: &str, lo: f64, hi: f64) -> CliResult<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(QstError::InvalidParameter(format!("{name} range [{lo}, {hi}] is empty or not finite")).into())
    }
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(QstError::InvalidParameter(format!("{name} must be positive, got {v}")).into())
    }
}

fn decompose(spec: &ChainSpec, profile: &FieldProfile) -> CliResult<SpectralDecomposition> {
    Ok(eigendecompose(&build_hamiltonian(spec, profile)?)?)
}

/// Rabi time of the bi-localized pair, when the profile has barriers to speak of.
fn rabi_time(decomp: &SpectralDecomposition, profile: &FieldProfile) -> Option<f64> {
    if decomp.dim() < 4 || profile.as_slice().iter().all(|&k| k == 0.0) {
        return None;
    }
    localization_report(decomp, profile).ok().and_then(|r| rabi_transfer_time(&r).ok())
}

pub fn spectrum(a: &SpectrumArgs, out: &mut Output) -> CliResult<Outcome> {
    check_range("omega", a.omega_min, a.omega_max)?;
    let omegas = linspace(a.omega_min, a.omega_max, a.steps);
    let mut per_n = Vec::new();
    for &n in &a.n {
        let spec = ChainSpec::new(n, a.coupling)?;
        let rows = omegas
            .par_iter()
            .map(|&w| {
                let p = barrier_profile(&spec, w)?;
                let plus = decompose(&spec, &p)?;
                let minus = decompose(&spec, &p.negated())?;
                Ok((0..n).map(|k| (w, k + 1, plus.eigenvalues()[k], minus.eigenvalues()[k])).collect::<Vec<_>>())
            })
            .collect::<CliResult<Vec<_>>>()?;
        out.csv(
            &format!("spectrum_N{n}.csv"),
            "omega,k,lambda_plus,lambda_minus",
            &["lambda_plus: diagonal +2K_n; lambda_minus: diagonal -2K_n; both ascending in k".into()],
            rows.iter().flatten(),
        )?;
        let last: Option<Vec<f64>> = rows.last().map(|r| r.iter().map(|x| x.2).collect());
        per_n.push(json!({ "n_sites": n, "lambda_plus_at_omega_max": last }));
    }
    Ok(Outcome::new("spectrum".into(), json!({ "omega_points": omegas.len(), "chains": per_n })))
}

pub fn ipr_sweep(a: &IprArgs, out: &mut Output) -> CliResult<Outcome> {
    check_range("omega", a.omega_min, a.omega_max)?;
    let omegas = linspace(a.omega_min, a.omega_max, a.steps);
    let role = |r: &LocalizationReport, k: usize| {
        if k == r.barrier_pair.0 || k == r.barrier_pair.1 {
            "barrier"
        } else if k == r.bilocalized_pair.0 || k == r.bilocalized_pair.1 {
            "bilocalized"
        } else {
            "band"
        }
    };
    let mut per_n = Vec::new();
    for &n in &a.n {
        let spec = ChainSpec::uniform(n)?;
        let per_omega = omegas
            .par_iter()
            .map(|&w| {
                let p = barrier_profile(&spec, w)?;
                let d = decompose(&spec, &p)?;
                let r = localization_report(&d, &p)?;
                Ok((w, d.eigenvalues().to_vec(), r))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let rows = per_omega.iter().flat_map(|(w, lam, r)| {
            (0..lam.len()).map(move |k| (*w, k + 1, lam[k], r.ipr_per_state[k], role(r, k)))
        });
        out.csv(&format!("ipr_N{n}.csv"), "omega,k,energy,ipr,role", &[], rows)?;
        let (w, _, r) = per_omega.last().expect("at least one omega");
        let pair_ipr = |p: (usize, usize)| [r.ipr_per_state[p.0], r.ipr_per_state[p.1]];
        per_n.push(json!({
            "n_sites": n,
            "omega": w,
            "barrier_pair_ipr": pair_ipr(r.barrier_pair),
            "bilocalized_pair_ipr": pair_ipr(r.bilocalized_pair),
            "gap": r.gap,
        }));
    }
    Ok(Outcome::new("ipr".into(), json!({ "at_omega_max": per_n })))
}

pub fn transfer(a: &TransferArgs, out: &mut Output) -> CliResult<Outcome> {
    check_positive("T", a.window)?;
    check_positive("dt", a.dt)?;
    let cases = match &a.profile {
        Some(path) => {
            let (spec, profile) = ProfileConfig::parse(&std::fs::read_to_string(path)?)?.build()?;
            vec![(format!("transfer_N{}_profile", spec.n_sites()), spec, profile)]
        }
        None => {
            let spec = ChainSpec::uniform(a.n)?;
            a.omega
                .iter()
                .map(|&w| Ok((format!("transfer_N{}_w{w}", a.n), spec, barrier_profile(&spec, w)?)))
                .collect::<CliResult<Vec<_>>>()?
        }
    };
    let mut runs = Vec::new();
    for (name, spec, profile) in cases {
        let d = decompose(&spec, &profile)?;
        let t_max = rabi_time(&d, &profile);
        let peak = max_fidelity(&d, a.window, &PeakSearch::for_rabi_time(t_max))?;
        out.csv(
            &format!("{name}.csv"),
            TransferRecord::CSV_HEADER,
            &[format!("fields: {:?}", profile.as_slice())],
            transfer_series(&d, a.window, a.dt)?,
        )?;
        runs.push(json!({
            "dataset": name,
            "n_sites": spec.n_sites(),
            "t_max": t_max,
            "peak_time": peak.time,
            "peak_avg_fidelity": peak.value,
        }));
    }
    Ok(Outcome::new("transfer".into(), json!({ "runs": runs })))
}

pub fn maxfid(a: &MaxfidArgs, out: &mut Output) -> CliResult<Outcome> {
    check_range("omega", a.omega_min, a.omega_max)?;
    check_positive("T", a.window)?;
    if a.n_step == 0 || a.n_min > a.n_max {
        return Err(QstError::InvalidParameter(format!("bad N range {}..={} step {}", a.n_min, a.n_max, a.n_step)).into());
    }
    let omegas = linspace(a.omega_min, a.omega_max, a.omega_steps);
    let grid: Vec<(usize, f64)> =
        (a.n_min..=a.n_max).step_by(a.n_step).flat_map(|n| omegas.iter().map(move |&w| (n, w))).collect();
    let rows = grid
        .par_iter()
        .map(|&(n, w)| {
            let spec = ChainSpec::uniform(n)?;
            let p = barrier_profile(&spec, w)?;
            let d = decompose(&spec, &p)?;
            let peak = max_fidelity(&d, a.window, &PeakSearch::for_rabi_time(rabi_time(&d, &p)))?;
            // F̄ = |f|/3 + |f|²/6 + 1/2 inverted; concurrence equals |f|.
            let abs_f = ((6.0 * peak.value - 2.0).max(1.0).sqrt() - 1.0).min(1.0);
            Ok((n, w, peak.value, abs_f, peak.time))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let stem = format!("maxfid_N{}-{}", a.n_min, a.n_max);
    out.csv(&format!("{stem}.csv"), "n,omega,max_avg_fidelity,max_concurrence,t_peak", &[], &rows)?;
    let best = rows.iter().max_by(|x, y| x.2.total_cmp(&y.2)).expect("non-empty grid");
    Ok(Outcome::new(
        stem,
        json!({ "points": rows.len(), "best": { "n_sites": best.0, "omega": best.1, "max_avg_fidelity": best.2 } }),
    ))
}

/// Least-squares slope of y against x.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn scaling(a: &ScalingArgs, out: &mut Output) -> CliResult<Outcome> {
    check_positive("omega-min", a.omega_min)?;
    check_positive("T", a.window)?;
    check_range("omega", a.omega_min, a.omega_max)?;
    if a.points < 2 {
        return Err(QstError::InvalidParameter("scaling needs at least 2 points".into()).into());
    }
    let omegas = geomspace(a.omega_min, a.omega_max, a.points);
    let grid: Vec<(usize, f64)> = a.n.iter().flat_map(|&n| omegas.iter().map(move |&w| (n, w))).collect();
    let rows = grid
        .par_iter()
        .map(|&(n, w)| {
            let spec = ChainSpec::uniform(n)?;
            let p = barrier_profile(&spec, w)?;
            let d = decompose(&spec, &p)?;
            let r = localization_report(&d, &p)?;
            let t_max = rabi_transfer_time(&r)?;
            let peak = max_fidelity(&d, a.window, &PeakSearch::for_rabi_time(Some(t_max)))?;
            Ok((n, w, r.gap, t_max, peak.value, peak.time))
        })
        .collect::<CliResult<Vec<_>>>()?;
    out.csv("scaling.csv", "n,omega,gap,t_max,max_avg_fidelity,t_peak", &[], &rows)?;
    let log_w: Vec<f64> = omegas.iter().map(|w| w.ln()).collect();
    let mut fits = Vec::new();
    let mut lines = Vec::new();
    for (i, &n) in a.n.iter().enumerate() {
        let log_t: Vec<f64> = rows[i * a.points..(i + 1) * a.points].iter().map(|r| r.3.ln()).collect();
        let s = slope(&log_w, &log_t);
        lines.push(format!("N={n}: t_MAX ~ omega^{s:.4}"));
        fits.push(json!({ "n_sites": n, "slope": s }));
    }
    let mut o = Outcome::new("scaling".into(), json!({ "fits": fits }));
    o.lines = lines;
    Ok(o)
}

fn ensemble(
    model: DisorderModel,
    n: usize,
    omega: f64,
    window: f64,
    samples: usize,
    seed: u64,
    metric: Metric,
) -> CliResult<EnsembleResult> {
    let metric = match metric {
        Metric::Concurrence => EnsembleMetric::MaxConcurrence,
        Metric::Fidelity => EnsembleMetric::MaxFidelity,
    };
    let chain = ChainSpec::uniform(n)?;
    Ok(MonteCarlo { metric, model, chain, omega, window, n_samples: samples, seed, keep_samples: false }.run()?)
}

fn sample_count(samples: usize, full_scale: bool) -> usize {
    if full_scale {
        FULL_SCALE_SAMPLES
    } else {
        samples
    }
}

fn ensemble_notes(metric: Metric) -> Vec<String> {
    vec![format!("generator: {GENERATOR}"), format!("metric: window maximum of {metric:?}").to_lowercase()]
}

pub fn disorder(a: &DisorderArgs, out: &mut Output) -> CliResult<Outcome> {
    check_range("b", a.b_min, a.b_max)?;
    let samples = sample_count(a.samples, a.full_scale);
    let mut rows = Vec::new();
    for &w in &a.omega {
        for b in linspace(a.b_min, a.b_max, a.b_steps) {
            let r = ensemble(DisorderModel::BulkUniform { strength: b }, a.n, w, a.window, samples, a.seed, a.metric)?;
            rows.push((b, w, r.mean, r.std_error, r.n_samples, r.seed));
        }
    }
    let stem = format!("disorder_N{}", a.n);
    out.csv(&format!("{stem}.csv"), "b,omega,mean,stderr,n_samples,seed", &ensemble_notes(a.metric), &rows)?;
    let points: Vec<Value> =
        rows.iter().map(|r| json!({ "b": r.0, "omega": r.1, "mean": r.2, "stderr": r.3 })).collect();
    Ok(Outcome::new(stem, json!({ "generator": GENERATOR, "n_samples": samples, "points": points })))
}

pub fn leakage(a: &LeakageArgs, out: &mut Output) -> CliResult<Outcome> {
    check_range("omega", a.omega_min, a.omega_max)?;
    let samples = sample_count(a.samples, a.full_scale);
    let omegas = linspace(a.omega_min, a.omega_max, a.omega_steps);
    let mut rows = Vec::new();
    let mut best = Vec::new();
    for &n in &a.n {
        let mut top: Option<(usize, f64, f64, f64)> = None;
        for &w in &omegas {
            let r = ensemble(DisorderModel::BarrierLeakage { omega: w }, n, w, a.window, samples, a.seed, a.metric)?;
            rows.push((n, w, r.mean, r.std_error, r.n_samples, r.seed));
            if top.is_none_or(|t| r.mean > t.2) {
                top = Some((n, w, r.mean, r.std_error));
            }
        }
        best.extend(top);
    }
    let notes = ensemble_notes(a.metric);
    out.csv("leakage.csv", "n,omega,mean,stderr,n_samples,seed", &notes, &rows)?;
    out.csv("leakage_optimum.csv", "n,omega_opt,mean,stderr", &notes, &best)?;
    let optimum: Vec<Value> =
        best.iter().map(|b| json!({ "n_sites": b.0, "omega_opt": b.1, "mean": b.2, "stderr": b.3 })).collect();
    let mut o = Outcome::new("leakage".into(), json!({ "generator": GENERATOR, "n_samples": samples, "optimum": optimum }));
    o.lines = best.iter().map(|b| format!("N={}: best omega {} (mean {:.4} +/- {:.4})", b.0, b.1, b.2, b.3)).collect();
    Ok(o)
}

pub fn ebit(a: &EbitArgs, out: &mut Output) -> CliResult<Outcome> {
    check_positive("dt", a.dt)?;
    let chain = ChainSpec::uniform(a.n)?;
    let mut peaks = Vec::new();
    let mut lines = Vec::new();
    for &w in &a.omega {
        let c = EbitChannel::new(chain, w, EbitState::bell())?;
        let t_ref = c.reference_transfer_time()?;
        let window = match a.window {
            Some(t) => {
                check_positive("T", t)?;
                t
            }
            None => 3.0 * t_ref,
        };
        let peak = c.peak(window, &PeakSearch::for_rabi_time(Some(t_ref)))?;
        out.csv(
            &format!("ebit_N{}_w{w}.csv", a.n),
            EbitRecord::CSV_HEADER,
            &[format!("window: [0, {window}], single-qubit transfer time of the e-bit profile {t_ref}")],
            c.series(window, a.dt)?,
        )?;
        lines.push(format!("omega={w}: peak concurrence {:.4} at t={:.1}", peak.value, peak.time));
        peaks.push(json!({ "omega": w, "t_ref": t_ref, "window": window, "peak_concurrence": peak.value, "t_peak": peak.time }));
    }
    let mut o = Outcome::new(format!("ebit_N{}", a.n), json!({ "n_sites": a.n, "peaks": peaks }));
    o.lines = lines;
    Ok(o)
}

fn protocol_run(
    a: &ProtocolArgs,
    chain: &ChainSpec,
    interval: f64,
    switching: Switching,
    out: &mut Output,
) -> CliResult<(Value, String)> {
    let schedule = SwitchingSchedule::new(a.k1, a.k2, 0.0, a.t1, a.t1 + interval, switching)?;
    let run = simulate_protocol(chain, &schedule, schedule.t2 + a.storage, a.sample_step)?;
    let storage = storage_fidelity(&run, a.storage)?;
    let name = match switching {
        Switching::Logistic { timescale } => format!("protocol_N{}_tau{timescale}.csv", a.n),
        Switching::Step => format!("protocol_N{}_step.csv", a.n),
    };
    let mut notes = vec![format!("t1 = {}, t2 = {}, switching = {}", schedule.t1, schedule.t2, serde_json::to_string(&switching)?)];
    if a.n % 2 == 1 {
        notes.push("odd N: trapping is less efficient; reported as data only".into());
    }
    let rows = run.samples.iter().map(|s| (s.time, s.omega2, s.omega_nm1, s.abs_f, s.avg_fidelity));
    out.csv(&name, ProtocolSample::CSV_HEADER, &notes, rows)?;
    let line = format!(
        "{}: final F = {:.6}, best F = {:.6}, storage drift {:.2e}",
        serde_json::to_string(&switching)?,
        run.final_fidelity(),
        run.achievable_fidelity(),
        storage.drift
    );
    let summary = json!({
        "switching": switching,
        "rk4_step": run.step_size,
        "final_avg_fidelity": run.final_fidelity(),
        "achievable_avg_fidelity": run.achievable_fidelity(),
        "min_presend_survival": run.min_presend_survival(),
        "storage_mean": storage.mean,
        "storage_drift": storage.drift,
        "max_norm_error": run.max_norm_error(),
    });
    Ok((summary, line))
}

pub fn protocol(a: &ProtocolArgs, out: &mut Output) -> CliResult<Outcome> {
    check_positive("storage", a.storage)?;
    let chain = ChainSpec::uniform(a.n)?;
    let closed_form = optimal_interval(a.n, a.k2)?;
    let interval = match a.interval {
        Some(dt) => dt,
        None => optimal_interval_numeric(&chain, a.k1, a.k2, a.t1, closed_form)?.time,
    };
    let mut lines = vec![format!("dt = {interval:.3} (closed form {closed_form:.3})")];
    let mut runs = Vec::new();
    let switchings = std::iter::once(Switching::Step).chain(a.tau.iter().map(|&timescale| Switching::Logistic { timescale }));
    for sw in switchings {
        let (summary, line) = protocol_run(a, &chain, interval, sw, out)?;
        runs.push(summary);
        lines.push(line);
    }
    let results = json!({
        "n_sites": a.n,
        "interval": interval,
        "interval_closed_form": closed_form,
        "t1": a.t1,
        "t2": a.t1 + interval,
        "runs": runs,
    });
    let mut o = Outcome::new(format!("protocol_N{}", a.n), results);
    o.lines = lines;
    Ok(o)
}

pub fn effective(a: &EffectiveArgs, out: &mut Output) -> CliResult<Outcome> {
    check_range("omega", a.omega_min, a.omega_max)?;
    let omegas = linspace(a.omega_min, a.omega_max, a.steps);
    let mut per_n = Vec::new();
    for &n in &a.n {
        let rows = omegas.par_iter().map(|&w| predicted_vs_exact_gap(n, w)).collect::<Result<Vec<_>>>()?;
        out.csv(
            &format!("effective_N{n}.csv"),
            GapComparison::CSV_HEADER,
            &[],
            rows.iter().map(|g| (g.omega, g.gap_exact, g.gap_effective, g.ratio)),
        )?;
        let last = rows.last().expect("non-empty grid");
        per_n.push(json!({ "n_sites": n, "omega": last.omega, "ratio": last.ratio }));
    }
    Ok(Outcome::new("effective".into(), json!({ "at_omega_max": per_n })))
}

pub fn oracle_check(a: &OracleArgs, out: &mut Output) -> CliResult<Outcome> {
    let checks = run_checks(a.seed)?;
    out.csv("oracle_check.csv", "name,max_deviation,tolerance,passed", &[], &checks)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let mut lines = vec![format!("{:<width$}  {:>12}  {:>10}  result", "check", "max dev", "tolerance")];
    for c in &checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        lines.push(format!("{:<width$}  {:>12.3e}  {:>10.1e}  {verdict}", c.name, c.max_deviation, c.tolerance));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let mut o = Outcome::new("oracle_check".into(), json!({ "seed": a.seed, "checks": checks }));
    o.lines = lines;
    if !failed.is_empty() {
        o.failed = Some(format!("oracle checks failed: {}", failed.join(", ")));
    }
    Ok(o)
}

pub fn dispatch(command: &Command, out: &mut Output) -> CliResult<Outcome> {
    match command {
        Command::Spectrum(a) => spectrum(a, out),
        Command::Ipr(a) => ipr_sweep(a, out),
        Command::Transfer(a) => transfer(a, out),
        Command::Maxfid(a) => maxfid(a, out),
        Command::Scaling(a) => scaling(a, out),
        Command::Disorder(a) => disorder(a, out),
        Command::Leakage(a) => leakage(a, out),
        Command::Ebit(a) => ebit(a, out),
        Command::Protocol(a) => protocol(a, out),
        Command::Effective(a) => effective(a, out),
        Command::OracleCheck(a) => oracle_check(a, out),
        Command::Run(_) => Err(CliError::usage("`run` cannot be dispatched directly")),
    }
}

/// The subcommand's parameters as recorded in every output header.
pub fn config_of(command: &Command) -> CliResult<Value> {
    Ok(match command {
        Command::Spectrum(a) => serde_json::to_value(a)?,
        Command::Ipr(a) => serde_json::to_value(a)?,
        Command::Transfer(a) => serde_json::to_value(a)?,
        Command::Maxfid(a) => serde_json::to_value(a)?,
        Command::Scaling(a) => serde_json::to_value(a)?,
        Command::Disorder(a) => serde_json::to_value(a)?,
        Command::Leakage(a) => serde_json::to_value(a)?,
        Command::Ebit(a) => serde_json::to_value(a)?,
        Command::Protocol(a) => serde_json::to_value(a)?,
        Command::Effective(a) => serde_json::to_value(a)?,
        Command::OracleCheck(a) => serde_json::to_value(a)?,
        Command::Run(_) => Value::Null,
    })
}
