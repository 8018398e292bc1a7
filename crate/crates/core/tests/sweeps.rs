use kerr_loss::experiments::{
    baselines, fidelity_map, gain_vs_time, optimal_gain_surface, optimal_qfi, quadrature_ratio_map, qutrit_average_gain, qutrit_phis,
    small_time_gain, Experiment, RatioMode, SweepConfig, SweepSettings, NEGATIVE_GAIN_TOL,
};
use kerr_loss::numerics::linspace;
use kerr_loss::states::{Probe, ProbeKind, ProbeSpec, DEFAULT_DIM_CAP};

fn settings() -> SweepSettings {
    SweepSettings::default()
}

#[test]
fn no_kerr_means_no_gain() {
    let taus = linspace(0.05, 6.0, 25);
    for spec in [ProbeSpec::coherent(1.2), ProbeSpec::squeezed_with_nbar(0.8)] {
        let table = gain_vs_time(&spec, &[0.0], &taus, &settings()).unwrap();
        assert!(table.column("gain").unwrap().iter().all(|g| *g == 0.0));
        table.check_gain("qfi_kerr", "qfi_linear", "gain").unwrap();
    }
}

#[test]
fn coherent_gain_has_early_peak_and_later_structure() {
    let taus = linspace(0.02, 8.0, 400);
    let table = gain_vs_time(&ProbeSpec::coherent(1.0), &[0.5], &taus, &settings()).unwrap();
    table.check_gain("qfi_kerr", "qfi_linear", "gain").unwrap();
    let g = table.column("gain").unwrap();
    let peaks: Vec<usize> = (1..g.len() - 1).filter(|&i| g[i] > g[i - 1] && g[i] > g[i + 1]).collect();
    assert!(peaks.len() >= 2, "local maxima at {:?}", peaks.iter().map(|&i| taus[i]).collect::<Vec<_>>());
    assert!(taus[peaks[0]] < 1.0);
    let global = (0..g.len()).max_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap();
    assert!(taus[global] < 1.0);
    assert!(g.iter().all(|x| *x > 0.0));
}

#[test]
fn optimal_time_without_kerr_is_two() {
    let probe = Probe::prepare(ProbeSpec::coherent(1.3), DEFAULT_DIM_CAP).unwrap();
    let best = optimal_qfi(&probe, 0.0, &settings()).unwrap();
    assert!((best.x - 2.0).abs() < 1e-3, "{}", best.x);
}

#[test]
fn optimal_gain_surface_is_consistent() {
    let table = optimal_gain_surface(ProbeKind::Coherent, &[0.5, 1.0], &[0.0, 1.0, 2.0], &settings()).unwrap();
    assert_eq!(table.columns()[1], "alpha");
    table.check_gain("qfi_opt", "qfi_opt_linear", "gain").unwrap();
    let gains = table.column("gain").unwrap();
    assert_eq!(gains[0], 0.0);
    assert!(gains.iter().all(|g| *g >= -NEGATIVE_GAIN_TOL));
    // larger amplitude gains more at the same lambda
    assert!(gains[4] > gains[1]);

    let squeezed = optimal_gain_surface(ProbeKind::SqueezedVacuum, &[0.5], &[1.0], &settings()).unwrap();
    assert_eq!(squeezed.columns()[1], "nbar");
    assert!(optimal_gain_surface(ProbeKind::Fock, &[1.0], &[1.0], &settings()).is_err());
}

#[test]
fn small_time_gain_follows_quadratic_law_for_weak_kerr() {
    let table = small_time_gain(ProbeKind::Coherent, 0.1, &[1.0, 2.0], &[0.01, 0.02], &settings()).unwrap();
    let g = table.column("gain").unwrap();
    let predicted = table.column("gain_small_lambda").unwrap();
    for (g, p) in g.iter().zip(&predicted) {
        assert!(*g > 0.0 && *p > 0.0);
    }
    // quadratic in lambda at fixed alpha
    assert!(((g[1] / g[0]) - 4.0).abs() < 0.05, "{}", g[1] / g[0]);
    assert!(((g[3] / g[2]) - 4.0).abs() < 0.05, "{}", g[3] / g[2]);
    assert!(small_time_gain(ProbeKind::Coherent, 2.0, &[1.0], &[0.1], &settings()).is_err());
    let squeezed = small_time_gain(ProbeKind::SqueezedVacuum, 0.1, &[1.0], &[1.0], &settings()).unwrap();
    assert!(!squeezed.columns().iter().any(|c| c == "gain_small_lambda"));
}

#[test]
fn fidelity_decreases_with_time_and_kerr() {
    let taus = [0.05, 0.2, 0.5, 1.0];
    let table = fidelity_map(&[1.0], &[0.1, 0.5], &taus, None, &settings()).unwrap();
    let f = table.column("fidelity").unwrap();
    assert!(f.iter().all(|x| *x > 0.0 && *x <= 1.0 + 1e-12));
    for row in f.chunks(taus.len()) {
        assert!(row.windows(2).all(|w| w[1] < w[0]), "{row:?}");
    }
    for (weak, strong) in f[..taus.len()].iter().zip(&f[taus.len()..]) {
        assert!(strong < weak);
    }
}

#[test]
fn baselines_table_matches_closed_forms() {
    let table = baselines(1.0, &[0.05, 0.5, 2.0], &settings()).unwrap();
    let pairs = [("qfi_coherent", "qfi_coherent_numeric"), ("qfi_squeezed", "qfi_squeezed_numeric")];
    for (exact, numeric) in pairs {
        for (a, b) in table.column(exact).unwrap().iter().zip(table.column(numeric).unwrap()) {
            assert!((a - b).abs() <= 1e-5 * a, "{exact}: {a} vs {b}");
        }
    }
    let fock = table.column("qfi_fock").unwrap();
    let coherent = table.column("qfi_coherent").unwrap();
    assert!(fock.iter().zip(&coherent).all(|(f, c)| f > c));
}

#[test]
fn quadrature_ratio_bounded_at_optimal_time() {
    let table = quadrature_ratio_map(RatioMode::OptimalTime, &[0.5, 1.5], &[0.0, 1.0], &settings()).unwrap();
    assert_eq!(table.experiment(), "quadrature-ratio-optimal-time");
    let r = table.column("ratio").unwrap();
    assert!(r.iter().all(|x| *x <= 1.0 + 1e-6));
    assert!((r[0] - 1.0).abs() < 1e-4 && (r[2] - 1.0).abs() < 1e-4);
    assert!(r[3] < r[2]);
}

#[test]
fn qutrit_sampling_is_seeded() {
    let a = qutrit_phis(50, 3);
    assert_eq!(a, qutrit_phis(50, 3));
    assert_ne!(a, qutrit_phis(50, 4));
    assert!(a.iter().all(|p| *p > 0.0 && *p < std::f64::consts::FRAC_PI_2));

    let table = qutrit_average_gain(&[0.5], &[0.0, 1.0], 8, 3, &settings()).unwrap();
    let means = table.column("mean_gain").unwrap();
    assert_eq!(means[0], 0.0);
    let (lo, hi) = (table.column("min_gain").unwrap(), table.column("max_gain").unwrap());
    assert!(lo[1] <= means[1] && means[1] <= hi[1]);
    assert!(qutrit_average_gain(&[1.5], &[1.0], 8, 3, &settings()).is_err());
}

#[test]
fn parallel_output_order_is_grid_order() {
    let mut config = SweepConfig::new(Experiment::GainVsTime);
    config.alpha = vec![1.0];
    config.lambda = vec![0.5, 0.1];
    config.tau = vec![3.0, 0.2, 1.0];
    let table = config.resolved().unwrap().run().unwrap();
    assert_eq!(table.column("lambda").unwrap(), vec![0.5, 0.5, 0.5, 0.1, 0.1, 0.1]);
    assert_eq!(table.column("tau").unwrap(), vec![3.0, 0.2, 1.0, 3.0, 0.2, 1.0]);
}
