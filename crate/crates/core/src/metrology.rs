//! Quantum and classical Fisher information for the loss rate γ.
//!
//! Derivatives with respect to γ are taken at fixed Kerr coupling λ̃ and
//! fixed time t. In rescaled units that means moving along
//! `(τ, λ) → (τ(1 ± δ), λ/(1 ± δ))` with `δ = h/γ`; holding τ and λ fixed
//! instead gives a different (wrong) quantity.

use std::f64::consts::PI;
use std::ops::{Div, Sub};

use crate::channel::{self, ChannelParams, DensityMatrix};
use crate::numerics::{self, ComplexMatrix, ComplexVector};
use crate::states::{Probe, ProbeSpec, DEFAULT_DIM_CAP};
use crate::{Error, Result, C64};

/// Eigenvalue pairs with `p_n + p_m` at or below this are skipped.
pub const PAIR_CUTOFF: f64 = 1e-12;

/// Populations at or below this are skipped in the photon-counting FI.
pub const COUNTING_CUTOFF: f64 = 1e-14;

/// Quadrature densities below this are skipped in the homodyne FI.
pub const DENSITY_CUTOFF: f64 = 1e-12;

/// Densities below this are reported as inconsistent.
pub const NEGATIVE_DENSITY_TOL: f64 = 1e-10;

/// Grid points used for quadrature integrals.
pub const QUADRATURE_POINTS: usize = 4001;

/// Largest relative change tolerated when the quadrature grid is doubled.
pub const QUADRATURE_CONVERGENCE_TOL: f64 = 1e-4;

/// Finite-difference step in γ: `1e-5 · max(1, γ)`.
pub fn derivative_step(gamma: f64) -> f64 {
    1e-5 * gamma.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfiMethod {
    EigenNumeric,
    PureAnalytic,
    BaselineFormula,
}

impl QfiMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            QfiMethod::EigenNumeric => "eigen-numeric",
            QfiMethod::PureAnalytic => "pure-analytic",
            QfiMethod::BaselineFormula => "baseline-formula",
        }
    }
}

/// A QFI value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiResult {
    pub value: f64,
    /// `γ² · value`.
    pub qsnr: f64,
    pub method: QfiMethod,
    /// Truncation dimension; 0 for closed-form values.
    pub dim: usize,
    /// Finite-difference step in γ; 0 for closed-form values.
    pub step: f64,
}

impl QfiResult {
    fn new(value: f64, gamma: f64, method: QfiMethod, dim: usize, step: f64) -> Self {
        Self { value, qsnr: gamma * gamma * value, method, dim, step }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementKind {
    PhotonCounting,
    Quadrature,
}

/// Classical Fisher information of a specific measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementFi {
    pub kind: MeasurementKind,
    pub value: f64,
    /// Quadrature angle in radians; `None` for photon counting.
    pub phase: Option<f64>,
}

/// Central difference in γ at fixed λ̃ and t of any quantity computed from
/// channel parameters.
pub fn dgamma<T, F>(mut f: F, params: &ChannelParams, h: f64) -> Result<T>
where
    F: FnMut(&ChannelParams) -> Result<T>,
    T: Sub<Output = T> + Div<f64, Output = T>,
{
    if !(h > 0.0 && h < params.gamma()) {
        return Err(Error::InvalidArgument(format!("derivative step must lie in (0, gamma), got {h}")));
    }
    let delta = h / params.gamma();
    numerics::try_central_difference(|g| f(&params.scaled_gamma(g)), 1.0, delta).map(|d: T| d / params.gamma())
}

/// `∂ρ/∂γ` for a prepared probe.
pub fn dgamma_rho(probe: &Probe, params: &ChannelParams, h: f64) -> Result<ComplexMatrix> {
    dgamma(|p| Ok(channel::evolve(probe.initial(), p).into_matrix()), params, h)
}

/// `H = 2 Σ_{n,m} |⟨ψ_m|∂ρ|ψ_n⟩|² / (p_n + p_m)` over the eigensystem of ρ,
/// skipping pairs with `p_n + p_m ≤ 1e-12`.
pub fn qfi_mixed(rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != drho.dim() {
        return Err(Error::DimensionMismatch { left: rho.nrows(), right: drho.nrows() });
    }
    numerics::check_hermitian(drho)?;
    let eig = numerics::eig_hermitian(rho)?;
    let v = &eig.vectors;
    let m = numerics::adjoint(v).dot(drho).dot(v);
    let p = &eig.values;
    let mut h = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            let s = p[i] + p[j];
            if s > PAIR_CUTOFF {
                h += m[[i, j]].norm_sqr() / s;
            }
        }
    }
    Ok(2.0 * h)
}

/// Pure-state QFI,
/// `4[⟨∂ψ|∂ψ⟩ + ⟨∂ψ|ψ⟩² + ⟨ψ|∂ψ⟩² + |⟨∂ψ|ψ⟩|²]`.
///
/// For a normalized family `⟨ψ|∂ψ⟩` is imaginary and this equals
/// `4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)`. Both are computed; disagreement beyond
/// `1e-8 · max(1, H)` or an imaginary part beyond `1e-10 · max(1, H)` is an
/// error.
pub fn qfi_pure(psi: &ComplexVector, dpsi: &ComplexVector) -> Result<f64> {
    if psi.len() != dpsi.len() {
        return Err(Error::DimensionMismatch { left: psi.len(), right: dpsi.len() });
    }
    let inner = |a: &ComplexVector, b: &ComplexVector| -> C64 { a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum() };
    let dd = inner(dpsi, dpsi);
    let dp = inner(dpsi, psi);
    let pd = inner(psi, dpsi);
    let printed = (dd + dp * dp + pd * pd + dp.norm_sqr()) * 4.0;
    let standard = 4.0 * (dd.re - pd.norm_sqr());
    let scale = printed.re.abs().max(1.0);
    if printed.im.abs() > 1e-10 * scale || (printed.re - standard).abs() > 1e-8 * scale {
        return Err(Error::PureFormMismatch { printed: printed.re, standard });
    }
    Ok(printed.re)
}

/// Numerical QFI of a prepared probe.
pub fn qfi(probe: &Probe, params: &ChannelParams) -> Result<QfiResult> {
    let h = derivative_step(params.gamma());
    let rho = channel::evolve(probe.initial(), params);
    let drho = dgamma_rho(probe, params, h)?;
    let value = qfi_mixed(rho.matrix(), &drho)?;
    Ok(QfiResult::new(value, params.gamma(), QfiMethod::EigenNumeric, probe.dim(), h))
}

/// Numerical QFI with the truncation chosen by
/// [`required_dim`](crate::states::required_dim) under the default cap.
pub fn qfi_numeric(spec: &ProbeSpec, params: &ChannelParams) -> Result<QfiResult> {
    qfi(&Probe::prepare(*spec, DEFAULT_DIM_CAP)?, params)
}

/// QFI of the pure-state approximation, from the pure-state formula with a
/// finite-difference derivative of the normalized vector.
pub fn qfi_pure_approx(alpha: C64, params: &ChannelParams, dim: usize) -> Result<QfiResult> {
    let h = derivative_step(params.gamma());
    let psi = channel::pure_state_approx(alpha, params, dim)?;
    let dpsi = dgamma(|p| Ok(channel::pure_state_approx(alpha, p, dim)?.amplitudes().clone()), params, h)?;
    let value = qfi_pure(psi.amplitudes(), &dpsi)?;
    Ok(QfiResult::new(value, params.gamma(), QfiMethod::PureAnalytic, dim, h))
}

/// Closed-form QFI without Kerr nonlinearity, if the probe has one.
pub fn qfi_baseline(spec: &ProbeSpec, gamma: f64, tau: f64) -> Option<QfiResult> {
    spec.linear_qfi(gamma, tau).map(|v| QfiResult::new(v, gamma, QfiMethod::BaselineFormula, 0, 0.0))
}

/// Coherent probe without Kerr: `(n̄/γ²) τ² e^{−τ}`.
pub fn qfi_coherent_analytic(nbar: f64, gamma: f64, tau: f64) -> f64 {
    nbar * tau * tau * (-tau).exp() / (gamma * gamma)
}

/// Squeezed vacuum without Kerr:
/// `(e^{2τ} − 2e^τ + 2) τ² n̄ / (γ² (e^τ − 1)(2n̄(e^τ − 1) + e^{2τ}))`.
pub fn qfi_squeezed_analytic(nbar: f64, gamma: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    let em1 = tau.exp_m1();
    // e^{2τ} − 2e^τ + 2 = (e^τ − 1)² + 1
    (em1 * em1 + 1.0) * tau * tau * nbar / (gamma * gamma * em1 * (2.0 * nbar * em1 + (2.0 * tau).exp()))
}

/// Fock probe without Kerr: `n̄ τ² / (γ² (e^τ − 1))`.
pub fn qfi_fock_analytic(nbar: f64, gamma: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    nbar * tau * tau / (gamma * gamma * tau.exp_m1())
}

/// Pure-state approximation: `(|α|²/γ²) τ² e^{−τ} (1 + 4λ²τ²|α|⁴)`.
pub fn qfi_pure_approx_analytic(alpha: C64, lambda: f64, gamma: f64, tau: f64) -> f64 {
    let n2 = alpha.norm_sqr();
    qfi_coherent_analytic(n2, gamma, tau) * (1.0 + 4.0 * lambda * lambda * tau * tau * n2 * n2)
}

/// Photon-counting FI `Σ_p (∂ρ_pp)² / ρ_pp`.
pub fn fi_photon_counting(probe: &Probe, params: &ChannelParams) -> Result<MeasurementFi> {
    let rho = channel::evolve(probe.initial(), params);
    let drho = dgamma_rho(probe, params, derivative_step(params.gamma()))?;
    let value = rho
        .diagonal()
        .iter()
        .zip(drho.diag().iter())
        .filter(|(p, _)| **p > COUNTING_CUTOFF)
        .map(|(p, d)| d.re * d.re / p)
        .sum();
    Ok(MeasurementFi { kind: MeasurementKind::PhotonCounting, value, phase: None })
}

/// Quadrature density `p(x) = Σ_{p,q} e^{i(q−p)θ} ρ_pq ψ_p(x) ψ_q(x)`.
///
/// Linear in ρ, so it also gives `∂p/∂γ` when handed `∂ρ/∂γ`.
pub fn homodyne_distribution(rho: &ComplexMatrix, phase: f64, x: f64) -> f64 {
    let dim = rho.nrows();
    let psi = numerics::oscillator_wavefunctions(dim.saturating_sub(1), x);
    let mut total = C64::new(0.0, 0.0);
    for p in 0..dim {
        for q in 0..dim {
            let rot = C64::from_polar(1.0, (q as f64 - p as f64) * phase);
            total += rot * rho[[p, q]] * psi[p] * psi[q];
        }
    }
    total.re
}

/// Half-width of the quadrature grid, `6 + √(2·dim)`.
pub fn quadrature_half_width(dim: usize) -> f64 {
    6.0 + (2.0 * dim as f64).sqrt()
}

/// Quadrature densities of a state on a fixed grid, for any angle.
///
/// Stores the off-diagonal harmonics `S_k(x) = Σ_q ρ_{q+k,q} ψ_{q+k}(x) ψ_q(x)`,
/// so that `p(x) = S_0(x) + 2 Re Σ_{k≥1} e^{−ikθ} S_k(x)` costs `O(dim)` per
/// point and angle.
#[derive(Debug, Clone)]
pub struct QuadratureStatistics {
    xs: Vec<f64>,
    dx: f64,
    /// `harmonics[k][i] = S_k(xs[i])`
    harmonics: Vec<Vec<C64>>,
}

impl QuadratureStatistics {
    pub fn new(m: &ComplexMatrix, points: usize) -> Self {
        let dim = m.nrows();
        let half = quadrature_half_width(dim);
        let xs = numerics::linspace(-half, half, points);
        let dx = xs[1] - xs[0];
        let mut harmonics = vec![vec![C64::new(0.0, 0.0); points]; dim];
        for (i, &x) in xs.iter().enumerate() {
            let psi = numerics::oscillator_wavefunctions(dim - 1, x);
            for (k, row) in harmonics.iter_mut().enumerate() {
                row[i] = (0..dim - k).map(|q| m[[q + k, q]] * (psi[q + k] * psi[q])).sum();
            }
        }
        Self { xs, dx, harmonics }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Density at every grid point for angle `phase`.
    pub fn density(&self, phase: f64) -> Vec<f64> {
        let rot: Vec<C64> = (0..self.harmonics.len()).map(|k| C64::from_polar(1.0, -(k as f64) * phase)).collect();
        (0..self.xs.len())
            .map(|i| {
                let off: f64 = self.harmonics.iter().zip(&rot).skip(1).map(|(h, r)| (r * h[i]).re).sum();
                self.harmonics[0][i].re + 2.0 * off
            })
            .collect()
    }
}

/// `∫ (∂p)² / p dx` on a grid, skipping `p < 1e-12`.
fn fisher_integral(p: &[f64], dp: &[f64], xs: &[f64], dx: f64) -> Result<f64> {
    let mut integrand = Vec::with_capacity(p.len());
    for ((&pv, &dv), &x) in p.iter().zip(dp).zip(xs) {
        if pv < -NEGATIVE_DENSITY_TOL {
            return Err(Error::NegativeProbability { x, value: pv });
        }
        integrand.push(if pv < DENSITY_CUTOFF { 0.0 } else { dv * dv / pv });
    }
    Ok(numerics::trapezoid(&integrand, dx))
}

/// Homodyne Fisher information as a function of the quadrature angle.
#[derive(Debug, Clone)]
pub struct QuadratureFisher {
    rho: QuadratureStatistics,
    drho: QuadratureStatistics,
    rho_matrix: ComplexMatrix,
    drho_matrix: ComplexMatrix,
}

impl QuadratureFisher {
    pub fn new(probe: &Probe, params: &ChannelParams) -> Result<Self> {
        let rho = channel::evolve(probe.initial(), params).into_matrix();
        let drho = dgamma_rho(probe, params, derivative_step(params.gamma()))?;
        Ok(Self::from_matrices(rho, drho))
    }

    pub fn from_matrices(rho: ComplexMatrix, drho: ComplexMatrix) -> Self {
        Self {
            rho: QuadratureStatistics::new(&rho, QUADRATURE_POINTS),
            drho: QuadratureStatistics::new(&drho, QUADRATURE_POINTS),
            rho_matrix: rho,
            drho_matrix: drho,
        }
    }

    /// FI on the standard grid, without the refinement check.
    pub fn value(&self, phase: f64) -> Result<f64> {
        fisher_integral(&self.rho.density(phase), &self.drho.density(phase), self.rho.xs(), self.rho.dx())
    }

    /// FI at `phase`, recomputed on a doubled grid; a relative change above
    /// 1e-4 is an error.
    pub fn checked_value(&self, phase: f64) -> Result<f64> {
        let coarse = self.value(phase)?;
        let points = 2 * QUADRATURE_POINTS - 1;
        let r = QuadratureStatistics::new(&self.rho_matrix, points);
        let d = QuadratureStatistics::new(&self.drho_matrix, points);
        let fine = fisher_integral(&r.density(phase), &d.density(phase), r.xs(), r.dx())?;
        if (fine - coarse).abs() > QUADRATURE_CONVERGENCE_TOL * fine.abs().max(f64::MIN_POSITIVE) && fine.abs() > 1e-300 {
            return Err(Error::QuadratureNotConverged { coarse, fine });
        }
        Ok(fine)
    }

    /// Best angle in `[0, π)`.
    pub fn optimize(&self) -> Result<MeasurementFi> {
        let best = numerics::try_maximize_scalar(|phase| self.value(phase), 0.0, PI, 1e-6, numerics::DEFAULT_GRID_POINTS)?;
        let phase = best.x.rem_euclid(PI);
        let value = self.checked_value(phase)?;
        Ok(MeasurementFi { kind: MeasurementKind::Quadrature, value, phase: Some(phase) })
    }
}

/// Homodyne FI at a fixed quadrature angle.
pub fn fi_quadrature(probe: &Probe, params: &ChannelParams, phase: f64) -> Result<MeasurementFi> {
    let value = QuadratureFisher::new(probe, params)?.checked_value(phase)?;
    Ok(MeasurementFi { kind: MeasurementKind::Quadrature, value, phase: Some(phase) })
}

/// Homodyne FI maximized over the quadrature angle.
pub fn optimize_quadrature_phase(probe: &Probe, params: &ChannelParams) -> Result<MeasurementFi> {
    QuadratureFisher::new(probe, params)?.optimize()
}

/// Normalization `∫ p(x) dx` of a state's quadrature density on the standard grid.
pub fn homodyne_norm(rho: &DensityMatrix, phase: f64) -> f64 {
    let stats = QuadratureStatistics::new(rho.matrix(), QUADRATURE_POINTS);
    numerics::trapezoid(&stats.density(phase), stats.dx())
}
