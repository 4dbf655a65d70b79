use qst_core::disorder::{monte_carlo, sample_profile, DisorderModel, EnsembleMetric};
use qst_core::ebit::{EbitChannel, EbitState};
use qst_core::effective::{predicted_vs_exact_gap, EffectiveModel};
use qst_core::*;

fn exact_gap(n: usize, omega: f64) -> f64 {
    predicted_vs_exact_gap(n, omega).unwrap().gap_exact
}

#[test]
fn even_effective_model_tracks_exact_dynamics() {
    let (n, omega) = (20, 20.0);
    let spec = ChainSpec::uniform(n).unwrap();
    let p = barrier_profile(&spec, omega).unwrap();
    let d = eigendecompose(&build_hamiltonian(&spec, &p).unwrap()).unwrap();
    let kernel = d.transition_kernel(Site::first(), Site::last(n)).unwrap();
    let model = EffectiveModel::new(n, omega).unwrap();
    let period = 2.0 * model.transfer_time();
    let step = 0.5;
    let count = (period / step) as usize;
    let exact = kernel.scan_abs(0.0, step, count);
    let worst = exact
        .iter()
        .enumerate()
        .map(|(i, e)| (e - model.amplitude(i as f64 * step).norm()).abs())
        .fold(0.0, f64::max);
    // Measured 0.0235.
    assert!(worst <= 0.05, "max deviation {worst}");
}

#[test]
fn even_gap_quarters_when_field_doubles() {
    for n in [10, 20, 30] {
        for omega in [10.0, 20.0, 40.0] {
            let r = exact_gap(n, omega) / exact_gap(n, 2.0 * omega);
            assert!((r / 4.0 - 1.0).abs() <= 0.15, "n={n} omega={omega}: ratio {r}");
        }
    }
}

#[test]
fn odd_gap_halves_when_field_doubles() {
    for n in [11, 21, 31] {
        for omega in [10.0, 20.0, 40.0] {
            let r = exact_gap(n, omega) / exact_gap(n, 2.0 * omega);
            assert!((r / 2.0 - 1.0).abs() <= 0.15, "n={n} omega={omega}: ratio {r}");
        }
    }
}

#[test]
fn odd_gap_falls_like_inverse_length() {
    for n in (11..=29).step_by(2) {
        let r = exact_gap(n, 20.0) / exact_gap(n + 2, 20.0);
        let expect = (n + 2) as f64 / n as f64;
        assert!((r / expect - 1.0).abs() <= 0.15, "n={n}: ratio {r} vs {expect}");
    }
}

#[test]
fn gap_comparison_is_reported() {
    for n in [12, 13] {
        let g = predicted_vs_exact_gap(n, 10.0).unwrap();
        assert!(g.gap_exact > 0.0 && g.gap_effective > 0.0);
        assert!((g.ratio - g.gap_effective / g.gap_exact).abs() < 1e-15);
    }
}

#[test]
fn stronger_fields_transfer_more_entanglement() {
    let chain = ChainSpec::uniform(33).unwrap();
    let mut peaks = Vec::new();
    for omega in [5.0, 15.0, 45.0] {
        let c = EbitChannel::new(chain, omega, EbitState::bell()).unwrap();
        let t_ref = c.reference_transfer_time().unwrap();
        let p = c.peak(c.default_window().unwrap(), &PeakSearch::for_rabi_time(Some(t_ref))).unwrap();
        peaks.push(p.value);
    }
    assert!(peaks[1] >= peaks[0] - 0.01 && peaks[2] >= peaks[1] - 0.01, "{peaks:?}");
}

#[test]
fn disorder_means_are_thread_count_independent() {
    let chain = ChainSpec::uniform(10).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                monte_carlo(EnsembleMetric::MaxFidelity, DisorderModel::BarrierLeakage { omega: 30.0 }, chain, 30.0, 500.0, 64, 3)
                    .unwrap()
                    .mean
            })
    };
    assert_eq!(run(1).to_bits(), run(3).to_bits());
}

#[test]
fn leakage_samples_leave_barriers_and_ends_alone() {
    let spec = ChainSpec::uniform(12).unwrap();
    let base = barrier_profile(&spec, 40.0).unwrap();
    let m = DisorderModel::BarrierLeakage { omega: 40.0 };
    for i in 0..50 {
        let k = sample_profile(&m, &base, i, 1).unwrap();
        let k = k.as_slice();
        assert_eq!((k[0], k[1], k[10], k[11]), (0.0, 40.0, 40.0, 0.0));
        assert!(k[4..8].iter().all(|&x| x == 0.0));
    }
}
