//! Evolution through the lossy Kerr channel.
//!
//! The master equation in rescaled units (τ = γt, λ = λ̃/γ) reads, element by
//! element,
//!
//! ```text
//! dρ_pq/dτ = −[iλ(p² − q²) + (p + q)/2] ρ_pq + √((p+1)(q+1)) ρ_{p+1,q+1}
//! ```
//!
//! Each diagonal `k = p − q` evolves independently and its in-flow couplings
//! form a nilpotent shift, so the solution is a finite sum:
//!
//! ```text
//! ρ_pq(τ) = e^{−iλ(p²−q²)τ − (p+q)τ/2} Σ_j s_kʲ/j! √((p+j)!(q+j)!/(p!q!)) ρ_{p+j,q+j}(0)
//! s_k     = (1 − e^{−Δ_k τ}) / Δ_k,   Δ_k = 1 + 2iλk
//! ```
//!
//! [`evolve`] uses this sum; [`evolve_ode`] integrates the equation directly
//! and is kept as an independent check.

use crate::numerics::{self, ComplexMatrix};
use crate::states::{displaced_powers, FockVector};
use crate::{Error, Result, C64};

/// Trace tolerance accepted by [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-8;

/// Hermiticity tolerance accepted by [`DensityMatrix::new`].
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;

/// Loss rate, Kerr strength and interaction time.
///
/// Stored in rescaled form (γ, λ = λ̃/γ, τ = γt); the physical values are
/// derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    gamma: f64,
    lambda: f64,
    tau: f64,
}

impl ChannelParams {
    /// From loss rate γ, Kerr coupling λ̃ and time t.
    pub fn physical(gamma: f64, kerr: f64, time: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("gamma must be finite and > 0, got {gamma}")));
        }
        Self::rescaled(gamma, kerr / gamma, gamma * time)
    }

    /// From loss rate γ and the dimensionless λ and τ.
    pub fn rescaled(gamma: f64, lambda: f64, tau: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("gamma must be finite and > 0, got {gamma}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be finite and >= 0, got {tau}")));
        }
        Ok(Self { gamma, lambda, tau })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// λ = λ̃/γ.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// τ = γt.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// λ̃.
    pub fn kerr(&self) -> f64 {
        self.lambda * self.gamma
    }

    /// t.
    pub fn time(&self) -> f64 {
        self.tau / self.gamma
    }

    /// The same λ̃ and t with γ multiplied by `factor`.
    pub fn scaled_gamma(&self, factor: f64) -> Self {
        Self { gamma: self.gamma * factor, lambda: self.lambda / factor, tau: self.tau * factor }
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::rescaled(self.gamma, self.lambda, tau)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::rescaled(self.gamma, lambda, self.tau)
    }
}

/// Hermitian, unit-trace state over the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates shape, finiteness, Hermiticity (1e-10) and trace (1 ± 1e-8).
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let asymmetry = numerics::hermitian_asymmetry(&m);
        if asymmetry > DENSITY_HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry, tolerance: DENSITY_HERMITIAN_TOL });
        }
        let rho = Self(m);
        let trace = rho.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!("density matrix trace is {trace}, expected 1")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &FockVector) -> Self {
        let a = psi.amplitudes();
        let n = a.len();
        Self(ComplexMatrix::from_shape_fn((n, n), |(p, q)| a[p] * a[q].conj()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diag().iter().map(|z| z.re).sum()
    }

    /// Populations `ρ_nn`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diag().iter().map(|z| z.re).collect()
    }

    /// `tr ρ² = Σ |ρ_pq|²` for Hermitian ρ.
    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        numerics::hermitian_asymmetry(&self.0)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(numerics::eig_hermitian(&self.0)?.values.to_vec())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &FockVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: psi.dim(), right: self.dim() });
        }
        let a = psi.amplitudes();
        let rho_psi = self.0.dot(a);
        Ok(a.iter().zip(rho_psi.iter()).map(|(x, y)| x.conj() * y).sum::<C64>().re)
    }
}

/// `(1 − e^{−z})/z`, accurate near `z = 0`.
fn phi1(z: C64) -> C64 {
    if z.norm() < 0.1 {
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..20 {
            term *= -z / (n + 1) as f64;
            sum += term;
        }
        sum
    } else {
        (C64::new(1.0, 0.0) - (-z).exp()) / z
    }
}

/// Evolves `rho0` through the channel. Exact up to rounding for any input
/// supported on the truncated space.
pub fn evolve(rho0: &DensityMatrix, params: &ChannelParams) -> DensityMatrix {
    let r0 = rho0.matrix();
    let dim = r0.nrows();
    let (lambda, tau) = (params.lambda(), params.tau());
    let mut out = ComplexMatrix::zeros((dim, dim));
    let sqrt_n: Vec<f64> = (0..=dim).map(|n| (n as f64).sqrt()).collect();

    for k in 0..dim {
        let delta = C64::new(1.0, 2.0 * lambda * k as f64);
        let s = phi1(delta * tau) * tau;
        for q in 0..dim - k {
            let p = q + k;
            let mut coef = C64::new(1.0, 0.0);
            let mut acc = r0[[p, q]];
            for j in 1..dim - p {
                coef *= s * (sqrt_n[p + j] * sqrt_n[q + j] / j as f64);
                if coef.norm() == 0.0 {
                    break;
                }
                acc += coef * r0[[p + j, q + j]];
            }
            let (pf, qf) = (p as f64, q as f64);
            let phase = C64::new(-(pf + qf) * tau / 2.0, -lambda * (pf * pf - qf * qf) * tau).exp();
            out[[p, q]] = phase * acc;
        }
    }
    for p in 0..dim {
        out[[p, p]].im = 0.0;
        for q in p + 1..dim {
            out[[p, q]] = out[[q, p]].conj();
        }
    }
    DensityMatrix(out)
}

/// [`evolve`] applied to `|ψ⟩⟨ψ|`.
pub fn evolve_pure(psi: &FockVector, params: &ChannelParams) -> DensityMatrix {
    evolve(&DensityMatrix::pure(psi), params)
}

/// Closed-form evolution of the coherent state `|α⟩`:
///
/// ```text
/// ρ_pq = αᵖ ᾱ^q/√(p!q!) exp{−½(p+q)Δτ − |α|²[1 − (1 − e^{−Δτ})/Δ]},  Δ = 1 + 2iλ(p − q)
/// ```
pub fn evolve_coherent_exact(alpha: C64, params: &ChannelParams, dim: usize) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dim must be positive".into()));
    }
    let (lambda, tau) = (params.lambda(), params.tau());
    let b = displaced_powers(alpha, dim);
    let n2 = alpha.norm_sqr();
    let one = C64::new(1.0, 0.0);
    let m = ComplexMatrix::from_shape_fn((dim, dim), |(p, q)| {
        let delta = C64::new(1.0, 2.0 * lambda * (p as f64 - q as f64));
        let exponent = -0.5 * (p + q) as f64 * delta * tau - n2 * (one - phi1(delta * tau) * tau);
        b[p] * b[q].conj() * exponent.exp()
    });
    let asymmetry = numerics::hermitian_asymmetry(&m);
    let tolerance = DENSITY_HERMITIAN_TOL;
    if asymmetry > tolerance {
        return Err(Error::NotHermitian { asymmetry, tolerance });
    }
    Ok(DensityMatrix(m))
}

/// Right-hand side of the element-wise master equation. The in-flow term is
/// zero on the truncation boundary.
pub fn lindblad_rhs(rho: &ComplexMatrix, lambda: f64) -> ComplexMatrix {
    let dim = rho.nrows();
    ComplexMatrix::from_shape_fn((dim, dim), |(p, q)| {
        let (pf, qf) = (p as f64, q as f64);
        let rate = C64::new(0.5 * (pf + qf), lambda * (pf * pf - qf * qf));
        let mut d = -rate * rho[[p, q]];
        if p + 1 < dim && q + 1 < dim {
            d += ((pf + 1.0) * (qf + 1.0)).sqrt() * rho[[p + 1, q + 1]];
        }
        d
    })
}

/// Integrates the master equation for `|ψ0⟩⟨ψ0|` with adaptive Runge-Kutta
/// steps. The step count grows with `λ·dim²`; practical up to dim ≈ 100 at
/// λ ≤ 3.
pub fn evolve_ode(psi0: &FockVector, params: &ChannelParams, tol: f64) -> Result<DensityMatrix> {
    let lambda = params.lambda();
    let rho0 = DensityMatrix::pure(psi0);
    let (m, _) = numerics::integrate_ode(|_, y| lindblad_rhs(y, lambda), rho0.matrix(), params.tau(), tol)?;
    Ok(DensityMatrix(numerics::hermitian_part(&m)))
}

/// Pure-state approximation for small λ,
/// `ψ_p ∝ αᵖ/√p! · exp(−pτ/2 − iλp²τ − iλ|α|²pτ²)`, normalized.
pub fn pure_state_approx(alpha: C64, params: &ChannelParams, dim: usize) -> Result<FockVector> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dim must be positive".into()));
    }
    let (lambda, tau) = (params.lambda(), params.tau());
    let n2 = alpha.norm_sqr();
    let b = displaced_powers(alpha, dim);
    let mut amps: Vec<C64> = b
        .iter()
        .enumerate()
        .map(|(p, bp)| {
            let pf = p as f64;
            *bp * C64::new(-0.5 * pf * tau, -lambda * (pf * pf * tau + n2 * pf * tau * tau)).exp()
        })
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|z| *z /= norm);
    Ok(FockVector::new(amps.into()))
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(psi: &FockVector, rho: &DensityMatrix) -> Result<f64> {
    rho.expectation(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{coherent_state, fock_state, qutrit_state, squeezed_vacuum, squeezed_min_dim, PhotonNumber};
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn params(lambda: f64, tau: f64) -> ChannelParams {
        ChannelParams::rescaled(1.0, lambda, tau).unwrap()
    }

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        numerics::max_abs(&(a - b))
    }

    #[test]
    fn rescaling_identities() {
        let p = ChannelParams::physical(2.0, 3.0, 0.25).unwrap();
        assert_eq!(p.tau(), 0.5);
        assert_eq!(p.lambda(), 1.5);
        assert_eq!(p.kerr(), 3.0);
        assert_eq!(p.time(), 0.25);
        let s = p.scaled_gamma(1.5);
        assert!((s.kerr() - 3.0).abs() < 1e-15 && (s.time() - 0.25).abs() < 1e-15);
        assert!(ChannelParams::physical(0.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::rescaled(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn coherent_closed_form_at_zero_time_is_projector() {
        let alpha = C64::new(1.0, 0.0);
        let psi = coherent_state(alpha, 23).unwrap();
        let rho = evolve_coherent_exact(alpha, &params(0.7, 0.0), 23).unwrap();
        assert!(max_diff(rho.matrix(), DensityMatrix::pure(&psi).matrix()) < 1e-15);
    }

    #[test]
    fn coherent_without_kerr_stays_coherent() {
        let alpha = C64::new(1.3, 0.4);
        let dim = 30;
        let tau = 0.8;
        let rho = evolve_coherent_exact(alpha, &params(0.0, tau), dim).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
        let shrunk = crate::states::coherent_unchecked(alpha * (-tau / 2.0).exp(), dim);
        assert!((fidelity(&shrunk, &rho).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn populations_are_poisson_and_kerr_free() {
        let alpha = C64::new(1.0, 0.0);
        let a = evolve_coherent_exact(alpha, &params(0.0, 1.0), 25).unwrap();
        let b = evolve_coherent_exact(alpha, &params(5.0, 1.0), 25).unwrap();
        let mean = (-1.0f64).exp();
        let mut poisson = (-mean).exp();
        for (n, (x, y)) in a.diagonal().iter().zip(b.diagonal()).enumerate() {
            assert!((x - poisson).abs() < 1e-14 && (y - poisson).abs() < 1e-14, "n={n}");
            poisson *= mean / (n + 1) as f64;
        }
        let rho = evolve_coherent_exact(alpha, &params(0.3, 1.0), 25).unwrap();
        assert!((rho.mean_photon_number() - 1.0 / E).abs() < 1e-8);
    }

    #[test]
    fn coherent_closed_form_spectrum() {
        let rho = evolve_coherent_exact(C64::new(1.0, 0.0), &params(0.5, 1.0), 20).unwrap();
        let ev = rho.eigenvalues().unwrap();
        assert!(ev.iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)));
        assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn series_propagator_matches_closed_form() {
        for alpha in [C64::new(1.0, 0.0), C64::new(0.3, -1.2), C64::new(2.0, 0.0)] {
            let dim = crate::states::coherent_min_dim(alpha);
            let psi = coherent_state(alpha, dim).unwrap();
            for (lambda, tau) in [(0.0, 0.5), (0.5, 1.0), (3.0, 2.0), (0.01, 7.0)] {
                let p = params(lambda, tau);
                let exact = evolve_coherent_exact(alpha, &p, dim).unwrap();
                let series = evolve_pure(&psi, &p);
                // truncation of the input shows up only in the highest levels
                assert!(max_diff(exact.matrix(), series.matrix()) < 1e-8, "alpha={alpha} lambda={lambda} tau={tau}");
            }
        }
    }

    #[test]
    fn rhs_examples() {
        let vac = DensityMatrix::pure(&fock_state(0, 4).unwrap());
        assert!(numerics::max_abs(&lindblad_rhs(vac.matrix(), 1.3)) == 0.0);
        let one = DensityMatrix::pure(&fock_state(1, 4).unwrap());
        let d = lindblad_rhs(one.matrix(), 1.3);
        assert_eq!(d[[1, 1]], C64::new(-1.0, 0.0));
        assert_eq!(d[[0, 0]], C64::new(1.0, 0.0));
    }

    #[test]
    fn ode_matches_closed_form() {
        let alpha = C64::new(1.0, 0.0);
        let dim = 23;
        let psi = coherent_state(alpha, dim).unwrap();
        for (lambda, tau) in [(0.0, 1.0), (0.5, 1.0), (1.0, 2.5)] {
            let p = params(lambda, tau);
            let ode = evolve_ode(&psi, &p, 1e-10).unwrap();
            let exact = evolve_coherent_exact(alpha, &p, dim).unwrap();
            assert!(max_diff(ode.matrix(), exact.matrix()) < 1e-8, "lambda={lambda} tau={tau}");
        }
    }

    #[test]
    fn ode_semigroup_without_kerr() {
        let psi = coherent_state(C64::new(1.5, 0.0), 30).unwrap();
        let direct = evolve_ode(&psi, &params(0.0, 1.5), 1e-10).unwrap();
        let half = evolve_ode(&psi, &params(0.0, 0.7), 1e-10).unwrap();
        let (m, _) = numerics::integrate_ode(|_, y| lindblad_rhs(y, 0.0), half.matrix(), 0.8, 1e-10).unwrap();
        assert!(max_diff(direct.matrix(), &m) < 1e-8);
    }

    #[test]
    fn series_semigroup_with_kerr() {
        let psi = squeezed_vacuum(0.8, squeezed_min_dim(0.8)).unwrap();
        let direct = evolve_pure(&psi, &params(1.2, 1.5));
        let twice = evolve(&evolve_pure(&psi, &params(1.2, 0.4)), &params(1.2, 1.1));
        assert!(max_diff(direct.matrix(), twice.matrix()) < 1e-12);
    }

    #[test]
    fn fock_and_superposition_ignore_kerr() {
        let f = fock_state(3, 8).unwrap();
        let a = evolve_pure(&f, &params(0.0, 0.9));
        let b = evolve_pure(&f, &params(2.0, 0.9));
        assert!(max_diff(a.matrix(), b.matrix()) < 1e-15);
        let decayed = (-0.9f64).exp();
        assert!((a.diagonal()[3] - decayed.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn qutrit_stays_in_three_levels() {
        let q = qutrit_state(0.6, 0.7, PI, PI, 8).unwrap();
        for (lambda, tau) in [(0.5, 0.3), (3.0, 2.0)] {
            let rho = evolve_pure(&q, &params(lambda, tau));
            let ode = evolve_ode(&q, &params(lambda, tau), 1e-10).unwrap();
            for p in 0..8 {
                for r in 0..8 {
                    if p >= 3 || r >= 3 {
                        assert_eq!(rho.matrix()[[p, r]], C64::new(0.0, 0.0));
                        assert!(ode.matrix()[[p, r]].norm() == 0.0);
                    }
                }
            }
            assert!(max_diff(rho.matrix(), ode.matrix()) < 1e-9);
        }
    }

    #[test]
    fn long_times_reach_vacuum() {
        let psi = squeezed_vacuum(1.0, squeezed_min_dim(1.0)).unwrap();
        let rho = evolve_pure(&psi, &params(1.0, 30.0));
        assert!(rho.diagonal()[0] >= 1.0 - 1e-6);
    }

    #[test]
    fn spectrum_of_nearly_vacuum_squeezed_state() {
        // after long decay most eigenvalues are vanishingly small
        let r = crate::states::squeezing_for_nbar(1.541_117_220_258_343_8);
        let psi = squeezed_vacuum(r, squeezed_min_dim(r)).unwrap();
        let rho = evolve_pure(&psi, &params(0.0, 5.491_530_781_875_838));
        let ev = rho.eigenvalues().unwrap();
        assert!((ev.iter().sum::<f64>() - rho.trace()).abs() < 1e-12);
        assert!(ev[0] >= -1e-12);
    }

    #[test]
    fn pure_approximation_limits() {
        let alpha = C64::new(0.8, 0.0);
        let dim = 25;
        let v = pure_state_approx(alpha, &params(0.0, 1.2), dim).unwrap();
        let c = crate::states::coherent_unchecked(alpha * (-0.6f64).exp(), dim);
        assert!((v.inner(&c).norm() - 1.0).abs() < 1e-12);
        let v = pure_state_approx(alpha, &params(0.4, 0.0), dim).unwrap();
        let c = crate::states::coherent_unchecked(alpha, dim);
        assert!((v.inner(&c).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_approximation_fidelity() {
        let alpha = C64::new(0.5, 0.0);
        let dim = crate::states::coherent_min_dim(alpha);
        for (tau, lower) in [(1.0, 0.99), (20.0, 1.0 - 1e-3)] {
            let p = params(0.25, tau);
            let f = fidelity(&pure_state_approx(alpha, &p, dim).unwrap(), &evolve_coherent_exact(alpha, &p, dim).unwrap()).unwrap();
            assert!(f > lower && f <= 1.0 + 1e-10, "tau={tau} f={f}");
        }
    }

    #[test]
    fn fidelity_examples() {
        let psi = coherent_state(C64::new(0.7, 0.2), 25).unwrap();
        assert!((fidelity(&psi, &DensityMatrix::pure(&psi)).unwrap() - psi.norm_sqr().powi(2)).abs() < 1e-15);
        let zero = fock_state(0, 3).unwrap();
        let one = DensityMatrix::pure(&fock_state(1, 3).unwrap());
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!(fidelity(&fock_state(0, 4).unwrap(), &one).is_err());
    }

    #[test]
    fn density_validation() {
        let m = ComplexMatrix::from_diag_elem(2, C64::new(0.6, 0.0));
        assert!(DensityMatrix::new(m).is_err());
        let mut m = ComplexMatrix::from_diag_elem(2, C64::new(0.5, 0.0));
        m[[0, 1]] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[[1, 0]] = C64::new(0.0, -0.1);
        assert!(DensityMatrix::new(m).is_ok());
    }

    fn random_probe(kind: u8, x: f64, y: f64) -> FockVector {
        match kind {
            0 => {
                let a = C64::from_polar(2.0 * x, 6.0 * y);
                coherent_state(a, crate::states::coherent_min_dim(a)).unwrap()
            }
            1 => {
                let r = crate::states::squeezing_for_nbar(2.0 * x);
                squeezed_vacuum(r, squeezed_min_dim(r)).unwrap()
            }
            2 => fock_state((6.0 * x) as usize, 8).unwrap(),
            _ => qutrit_state(x.max(1e-3), y * PI / 2.0, PI, PI, 3).unwrap(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn evolved_states_are_physical(kind in 0u8..4, x in 0.0..1.0f64, y in 0.0..1.0f64,
                                       lambda in 0.0..3.0f64, tau in 0.0..6.0f64) {
            let psi = random_probe(kind, x, y);
            let rho = evolve_pure(&psi, &params(lambda, tau));
            prop_assert!((rho.trace() - 1.0).abs() < 1e-8);
            prop_assert!(rho.hermiticity_error() <= 1e-10);
            let min = rho.eigenvalues().unwrap()[0];
            prop_assert!(min >= -1e-8, "min eigenvalue {}", min);
            let flat = evolve_pure(&psi, &params(0.0, tau));
            for (a, b) in rho.diagonal().iter().zip(flat.diagonal()) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }

        #[test]
        fn rhs_is_traceless(kind in 0u8..4, x in 0.0..1.0f64, y in 0.0..1.0f64, lambda in 0.0..3.0f64) {
            let psi = random_probe(kind, x, y);
            let rho = evolve_pure(&psi, &params(0.3, 0.5));
            let d = lindblad_rhs(rho.matrix(), lambda);
            let dim = d.nrows();
            let tr: C64 = d.diag().iter().sum();
            prop_assert!(tr.norm() < 1e-12 * dim as f64);
        }
    }
}
