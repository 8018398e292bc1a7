use std::f64::consts::PI;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use super::table::{Cell, SweepResult};
use crate::channel::{self, ChannelParams};
use crate::metrology;
use crate::numerics::{self, Maximum, DEFAULT_GRID_POINTS};
use crate::states::{self, Probe, ProbeKind, ProbeSpec};
use crate::{Error, Result, C64};

/// Upper end of the interaction-time search interval.
pub const TAU_MAX: f64 = 12.0;

/// Lower end of the interaction-time search interval.
pub const TAU_MIN: f64 = 1e-3;

/// Gain below this in an optimal-gain surface is reported as an error.
pub const NEGATIVE_GAIN_TOL: f64 = 1e-6;

/// Truncation cap and optimizer tolerance shared by all sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub gamma: f64,
    pub dim_cap: usize,
    /// Bracket width at which time and phase searches stop.
    pub tol: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { gamma: 1.0, dim_cap: states::DEFAULT_DIM_CAP, tol: 1e-6 }
    }
}

fn point(params: &[(&str, f64)]) -> String {
    params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

fn gain(value: f64, baseline: f64) -> f64 {
    value / baseline - 1.0
}

fn check_positive_taus(taus: &[f64]) -> Result<()> {
    match taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        Some(t) => Err(Error::InvalidArgument(format!("gain needs tau > 0, got {t}"))),
        None => Ok(()),
    }
}

fn nonempty(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    Ok(())
}

/// QFI maximized over τ ∈ (0, 12] at fixed λ.
pub fn optimal_qfi(probe: &Probe, lambda: f64, settings: &SweepSettings) -> Result<Maximum> {
    let base = ChannelParams::rescaled(settings.gamma, lambda, 1.0)?;
    numerics::try_maximize_scalar(
        |tau| Ok::<_, Error>(metrology::qfi(probe, &base.with_tau(tau)?)?.value),
        TAU_MIN,
        TAU_MAX,
        settings.tol,
        DEFAULT_GRID_POINTS,
    )
}

fn prepare(spec: ProbeSpec, settings: &SweepSettings) -> Result<Probe> {
    Probe::prepare(spec, settings.dim_cap).map_err(|e| e.at(spec.describe()))
}

/// QFI with and without Kerr nonlinearity along a time grid.
pub fn gain_vs_time(spec: &ProbeSpec, lambdas: &[f64], taus: &[f64], settings: &SweepSettings) -> Result<SweepResult> {
    nonempty("lambda", lambdas)?;
    nonempty("tau", taus)?;
    check_positive_taus(taus)?;
    let probe = prepare(*spec, settings)?;
    let points: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| taus.iter().map(move |&t| (l, t))).collect();
    let rows = points
        .par_iter()
        .map(|&(lambda, tau)| {
            let at = || point(&[("lambda", lambda), ("tau", tau)]);
            let kerr = metrology::qfi(&probe, &ChannelParams::rescaled(settings.gamma, lambda, tau)?).map_err(|e| e.at(at()))?;
            let linear = metrology::qfi(&probe, &ChannelParams::rescaled(settings.gamma, 0.0, tau)?).map_err(|e| e.at(at()))?;
            Ok(vec![
                spec.kind().as_str().into(),
                spec.nbar().into(),
                lambda.into(),
                tau.into(),
                kerr.value.into(),
                linear.value.into(),
                gain(kerr.value, linear.value).into(),
                kerr.qsnr.into(),
                probe.dim().into(),
            ])
        })
        .collect::<Result<Vec<Vec<Cell>>>>()?;
    let mut out = SweepResult::new("gain-vs-time", &["probe", "nbar", "lambda", "tau", "qfi_kerr", "qfi_linear", "gain", "qsnr_kerr", "dim"]);
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

fn grid_probe(kind: ProbeKind, x: f64) -> Result<ProbeSpec> {
    match kind {
        ProbeKind::Coherent => Ok(ProbeSpec::coherent(x)),
        ProbeKind::SqueezedVacuum => Ok(ProbeSpec::squeezed_with_nbar(x)),
        other => Err(Error::InvalidArgument(format!("{} probes are not swept on an amplitude grid", other.as_str()))),
    }
}

/// Grid axis label: `alpha` for coherent probes, `nbar` for squeezed ones.
pub fn axis_name(kind: ProbeKind) -> &'static str {
    match kind {
        ProbeKind::Coherent => "alpha",
        _ => "nbar",
    }
}

/// Optimal-time gain `Ḡ = H̄_λ / H̄_0 − 1` over a grid of probe sizes and Kerr
/// strengths. `xs` are coherent amplitudes or squeezed-vacuum energies.
///
/// Fails if any gain is below −1e-6.
pub fn optimal_gain_surface(kind: ProbeKind, xs: &[f64], lambdas: &[f64], settings: &SweepSettings) -> Result<SweepResult> {
    nonempty(axis_name(kind), xs)?;
    nonempty("lambda", lambdas)?;
    let probes: Vec<Probe> = xs.par_iter().map(|&x| prepare(grid_probe(kind, x)?, settings)).collect::<Result<_>>()?;
    let baselines: Vec<Maximum> = probes
        .par_iter()
        .zip(xs)
        .map(|(p, &x)| optimal_qfi(p, 0.0, settings).map_err(|e| e.at(point(&[(axis_name(kind), x), ("lambda", 0.0)]))))
        .collect::<Result<_>>()?;
    let points: Vec<(usize, f64)> = (0..xs.len()).flat_map(|i| lambdas.iter().map(move |&l| (i, l))).collect();
    let rows = points
        .par_iter()
        .map(|&(i, lambda)| {
            let at = point(&[(axis_name(kind), xs[i]), ("lambda", lambda)]);
            let best = optimal_qfi(&probes[i], lambda, settings).map_err(|e| e.at(at.clone()))?;
            let g = gain(best.value, baselines[i].value);
            if g < -NEGATIVE_GAIN_TOL {
                return Err(Error::InvalidArgument(format!("optimal gain {g} is negative")).at(at));
            }
            Ok(vec![
                kind.as_str().into(),
                xs[i].into(),
                lambda.into(),
                best.x.into(),
                best.value.into(),
                baselines[i].x.into(),
                baselines[i].value.into(),
                g.into(),
                probes[i].dim().into(),
            ])
        })
        .collect::<Result<Vec<Vec<Cell>>>>()?;
    let mut out = SweepResult::new(
        "optimal-gain",
        &["probe", axis_name(kind), "lambda", "tau_opt", "qfi_opt", "tau_opt_linear", "qfi_opt_linear", "gain", "dim"],
    );
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

/// Gain at one fixed time over a grid of probe sizes and Kerr strengths.
/// For coherent probes the small-λ prediction `4λ²τ²|α|⁴` is included.
pub fn small_time_gain(kind: ProbeKind, tau: f64, xs: &[f64], lambdas: &[f64], settings: &SweepSettings) -> Result<SweepResult> {
    nonempty(axis_name(kind), xs)?;
    nonempty("lambda", lambdas)?;
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidArgument(format!("small-time gain needs 0 < tau < 1, got {tau}")));
    }
    let probes: Vec<Probe> = xs.par_iter().map(|&x| prepare(grid_probe(kind, x)?, settings)).collect::<Result<_>>()?;
    let linear: Vec<f64> = probes
        .par_iter()
        .map(|p| Ok(metrology::qfi(p, &ChannelParams::rescaled(settings.gamma, 0.0, tau)?)?.value))
        .collect::<Result<_>>()?;
    let points: Vec<(usize, f64)> = (0..xs.len()).flat_map(|i| lambdas.iter().map(move |&l| (i, l))).collect();
    let rows = points
        .par_iter()
        .map(|&(i, lambda)| {
            let at = || point(&[(axis_name(kind), xs[i]), ("lambda", lambda), ("tau", tau)]);
            let h = metrology::qfi(&probes[i], &ChannelParams::rescaled(settings.gamma, lambda, tau)?).map_err(|e| e.at(at()))?;
            let mut row: Vec<Cell> = vec![
                kind.as_str().into(),
                xs[i].into(),
                lambda.into(),
                tau.into(),
                h.value.into(),
                linear[i].into(),
                gain(h.value, linear[i]).into(),
            ];
            if kind == ProbeKind::Coherent {
                row.push((4.0 * lambda * lambda * tau * tau * xs[i].powi(4)).into());
            }
            row.push(probes[i].dim().into());
            Ok(row)
        })
        .collect::<Result<Vec<Vec<Cell>>>>()?;
    let mut columns = vec!["probe", axis_name(kind), "lambda", "tau", "qfi_kerr", "qfi_linear", "gain"];
    if kind == ProbeKind::Coherent {
        columns.push("gain_small_lambda");
    }
    columns.push("dim");
    let mut out = SweepResult::new("small-time-gain", &columns);
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

/// How the homodyne FI is compared with the QFI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioMode {
    /// `R̄ = F_x(τ̄) / H̄_λ` at the time τ̄ maximizing the Kerr QFI.
    OptimalTime,
    /// `R = F_x(τ) / H_0(τ)` against the linear-channel QFI at fixed τ.
    FixedTime(f64),
}

/// Phase-optimized homodyne FI relative to the QFI, for coherent probes.
pub fn quadrature_ratio_map(mode: RatioMode, alphas: &[f64], lambdas: &[f64], settings: &SweepSettings) -> Result<SweepResult> {
    nonempty("alpha", alphas)?;
    nonempty("lambda", lambdas)?;
    if let RatioMode::FixedTime(tau) = mode {
        check_positive_taus(&[tau])?;
    }
    let probes: Vec<Probe> = alphas.par_iter().map(|&a| prepare(ProbeSpec::coherent(a), settings)).collect::<Result<_>>()?;
    let points: Vec<(usize, f64)> = (0..alphas.len()).flat_map(|i| lambdas.iter().map(move |&l| (i, l))).collect();
    let rows = points
        .par_iter()
        .map(|&(i, lambda)| {
            let probe = &probes[i];
            let run = || -> Result<Vec<Cell>> {
                let (tau, h_kerr, reference) = match mode {
                    RatioMode::OptimalTime => {
                        let best = optimal_qfi(probe, lambda, settings)?;
                        (best.x, best.value, best.value)
                    }
                    RatioMode::FixedTime(tau) => {
                        let h = metrology::qfi(probe, &ChannelParams::rescaled(settings.gamma, lambda, tau)?)?.value;
                        (tau, h, metrology::qfi_coherent_analytic(alphas[i] * alphas[i], settings.gamma, tau))
                    }
                };
                let params = ChannelParams::rescaled(settings.gamma, lambda, tau)?;
                let fx = metrology::optimize_quadrature_phase(probe, &params)?;
                Ok(vec![
                    alphas[i].into(),
                    lambda.into(),
                    tau.into(),
                    fx.value.into(),
                    fx.phase.unwrap_or(0.0).into(),
                    h_kerr.into(),
                    reference.into(),
                    (fx.value / reference).into(),
                    probe.dim().into(),
                ])
            };
            run().map_err(|e| e.at(point(&[("alpha", alphas[i]), ("lambda", lambda)])))
        })
        .collect::<Result<Vec<Vec<Cell>>>>()?;
    let name = match mode {
        RatioMode::OptimalTime => "quadrature-ratio-optimal-time",
        RatioMode::FixedTime(_) => "quadrature-ratio-fixed-time",
    };
    let mut out = SweepResult::new(name, &["alpha", "lambda", "tau", "fi_quadrature", "phase", "qfi_kerr", "qfi_reference", "ratio", "dim"]);
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

/// Qutrit mixing angles φ ∈ (0, π/2), drawn from a SplitMix64 stream.
pub fn qutrit_phis(samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..samples).map(|_| rng.sample::<f64, _>(Open01) * PI / 2.0).collect()
}

/// Average over random qutrit probes (μ = ν = π) of `H̄_λ / H̄_0 − 1`, each
/// optimum taken over τ for the fixed initial state.
pub fn qutrit_average_gain(nbars: &[f64], lambdas: &[f64], samples: usize, seed: u64, settings: &SweepSettings) -> Result<SweepResult> {
    nonempty("nbar", nbars)?;
    nonempty("lambda", lambdas)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if let Some(n) = nbars.iter().find(|n| !(**n > 0.0 && **n <= 1.0)) {
        return Err(Error::InvalidArgument(format!("qutrit nbar must lie in (0, 1], got {n}")));
    }
    let phis = qutrit_phis(samples, seed);
    let jobs: Vec<(usize, usize)> = (0..nbars.len()).flat_map(|i| (0..samples).map(move |s| (i, s))).collect();
    // optimum without Kerr, per (n̄, φ)
    let prepared: Vec<(Probe, f64)> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let at = || point(&[("nbar", nbars[i]), ("phi", phis[s])]);
            let probe = Probe::with_dim(ProbeSpec::qutrit(nbars[i], phis[s]), 3).map_err(|e| e.at(at()))?;
            let base = optimal_qfi(&probe, 0.0, settings).map_err(|e| e.at(at()))?;
            Ok((probe, base.value))
        })
        .collect::<Result<_>>()?;
    let points: Vec<(usize, f64)> = (0..nbars.len()).flat_map(|i| lambdas.iter().map(move |&l| (i, l))).collect();
    let rows = points
        .par_iter()
        .map(|&(i, lambda)| {
            let gains: Vec<f64> = (0..samples)
                .map(|s| {
                    let (probe, base) = &prepared[i * samples + s];
                    let best = optimal_qfi(probe, lambda, settings)
                        .map_err(|e| e.at(point(&[("nbar", nbars[i]), ("phi", phis[s]), ("lambda", lambda)])))?;
                    Ok(gain(best.value, *base))
                })
                .collect::<Result<_>>()?;
            let mean = gains.iter().sum::<f64>() / samples as f64;
            let var = gains.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (samples.max(2) - 1) as f64;
            let (min, max) = gains.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &g| (lo.min(g), hi.max(g)));
            Ok(vec![
                nbars[i].into(),
                lambda.into(),
                mean.into(),
                (var / samples as f64).sqrt().into(),
                min.into(),
                max.into(),
                samples.into(),
                3usize.into(),
            ])
        })
        .collect::<Result<Vec<Vec<Cell>>>>()?;
    let mut out = SweepResult::new("qutrit-gain", &["nbar", "lambda", "mean_gain", "stderr_gain", "min_gain", "max_gain", "samples", "dim"]);
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

/// Fidelity of the pure-state approximation to the exact coherent evolution.
/// `dim` defaults to the coherent leakage bound of each α.
pub fn fidelity_map(alphas: &[f64], lambdas: &[f64], taus: &[f64], dim: Option<usize>, settings: &SweepSettings) -> Result<SweepResult> {
    nonempty("alpha", alphas)?;
    nonempty("lambda", lambdas)?;
    nonempty("tau", taus)?;
    let points: Vec<(f64, f64, f64)> = alphas
        .iter()
        .flat_map(|&a| lambdas.iter().flat_map(move |&l| taus.iter().map(move |&t| (a, l, t))))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(a, lambda, tau)| {
            let alpha = C64::new(a, 0.0);
            let d = dim.unwrap_or_else(|| states::coherent_min_dim(alpha));
            let run = || -> Result<f64> {
                let params = ChannelParams::rescaled(settings.gamma, lambda, tau)?;
                let exact = channel::evolve_coherent_exact(alpha, &params, d)?;
                channel::fidelity(&channel::pure_state_approx(alpha, &params, d)?, &exact)
            };
            let f = run().map_err(|e| e.at(point(&[("alpha", a), ("lambda", lambda), ("tau", tau)])))?;
            Ok(vec![a.into(), lambda.into(), tau.into(), f.into(), d.into()])
        })
        .collect::<Result<Vec<Vec<Cell>>>>()?;
    let mut out = SweepResult::new("fidelity-map", &["alpha", "lambda", "tau", "fidelity", "dim"]);
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}

/// Linear-channel QFI of coherent, squeezed-vacuum and Fock probes at equal
/// energy, closed forms next to numerical values for the first two.
pub fn baselines(nbar: f64, taus: &[f64], settings: &SweepSettings) -> Result<SweepResult> {
    nonempty("tau", taus)?;
    let coherent = prepare(ProbeSpec::coherent(nbar.sqrt()), settings)?;
    let squeezed = prepare(ProbeSpec::squeezed_with_nbar(nbar), settings)?;
    let g = settings.gamma;
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let params = ChannelParams::rescaled(g, 0.0, tau).map_err(|e| e.at(point(&[("tau", tau)])))?;
            let hc = metrology::qfi(&coherent, &params).map_err(|e| e.at(point(&[("tau", tau)])))?;
            let hs = metrology::qfi(&squeezed, &params).map_err(|e| e.at(point(&[("tau", tau)])))?;
            Ok(vec![
                nbar.into(),
                tau.into(),
                metrology::qfi_coherent_analytic(nbar, g, tau).into(),
                metrology::qfi_squeezed_analytic(nbar, g, tau).into(),
                metrology::qfi_fock_analytic(nbar, g, tau).into(),
                hc.value.into(),
                hs.value.into(),
                coherent.dim().into(),
                squeezed.dim().into(),
            ])
        })
        .collect::<Result<Vec<Vec<Cell>>>>()?;
    let mut out = SweepResult::new(
        "baselines",
        &["nbar", "tau", "qfi_coherent", "qfi_squeezed", "qfi_fock", "qfi_coherent_numeric", "qfi_squeezed_numeric", "dim", "dim_squeezed"],
    );
    rows.into_iter().for_each(|r| out.push(r));
    Ok(out)
}
