//! Probe states in a truncated Fock basis and the truncation policy.
//!
//! Constructors never renormalize after truncation. Instead the dimension
//! must be large enough that the discarded probability `1 - ‖ψ‖²` is at most
//! [`LEAKAGE_TOL`].

use std::f64::consts::PI;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, DensityMatrix};
use crate::metrology;
use crate::numerics::ComplexVector;
use crate::{Error, Result, C64};

/// Largest admissible truncation leakage.
pub const LEAKAGE_TOL: f64 = 1e-8;

/// Relative agreement with the linear-channel closed form demanded by
/// [`required_dim`].
pub const BASELINE_MATCH_TOL: f64 = 1e-5;

/// Default hard cap on the truncation dimension.
pub const DEFAULT_DIM_CAP: usize = 300;

/// Pure state as Fock-basis amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: ComplexVector,
}

impl FockVector {
    pub fn new(amplitudes: ComplexVector) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability mass outside the truncated space, `1 - ‖ψ‖²`.
    pub fn leakage(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Mean photon number of a state.
pub trait PhotonNumber {
    fn mean_photon_number(&self) -> f64;
}

impl PhotonNumber for FockVector {
    fn mean_photon_number(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum()
    }
}

impl PhotonNumber for DensityMatrix {
    fn mean_photon_number(&self) -> f64 {
        self.diagonal().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// `Σ n |ψ_n|²` or `Σ n ρ_nn`.
pub fn mean_photon_number<S: PhotonNumber>(state: &S) -> f64 {
    state.mean_photon_number()
}

/// `α^n / √n!` for `n < dim`, by the recurrence `b_{n+1} = b_n α / √(n+1)`.
pub(crate) fn displaced_powers(alpha: C64, dim: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    let mut b = C64::new(1.0, 0.0);
    for n in 0..dim {
        out.push(b);
        b = b * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Smallest dimension the leakage policy accepts for a coherent state:
/// `ceil(|α|² + 8√(|α|² + 1) + 10)`.
pub fn coherent_min_dim(alpha: C64) -> usize {
    let nbar = alpha.norm_sqr();
    (nbar + 8.0 * (nbar + 1.0).sqrt() + 10.0).ceil() as usize
}

/// Coherent state `|α⟩`, amplitudes `e^{-|α|²/2} αⁿ/√n!`.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<FockVector> {
    let required = coherent_min_dim(alpha);
    if dim < required {
        return Err(Error::InvalidArgument(format!(
            "coherent state with |alpha|^2 = {} needs dim >= {required}, got {dim}",
            alpha.norm_sqr()
        )));
    }
    Ok(coherent_unchecked(alpha, dim))
}

pub(crate) fn coherent_unchecked(alpha: C64, dim: usize) -> FockVector {
    let norm = (-0.5 * alpha.norm_sqr()).exp();
    FockVector::new(displaced_powers(alpha, dim).into_iter().map(|b| b * norm).collect())
}

/// Squeezing argument whose vacuum has mean photon number `nbar`.
pub fn squeezing_for_nbar(nbar: f64) -> f64 {
    nbar.sqrt().asinh()
}

/// Smallest dimension with squeezed-vacuum leakage at most [`LEAKAGE_TOL`]
/// and truncated energy at most `1e-7 · n̄`.
///
/// Both tails are bounded by geometric series: successive even-level
/// probabilities shrink by at most `tanh² r`, and the energy terms
/// `2m P_{2m}` beyond level `2M + 2` by at most `tanh² r (2M+3)/(2M+2)`.
pub fn squeezed_min_dim(r: f64) -> usize {
    let t2 = r.tanh().powi(2);
    let nbar = r.sinh().powi(2);
    let mut p = 1.0 / r.cosh();
    let mut m = 0usize;
    loop {
        let next = p * t2 * (2 * m + 1) as f64 / (2 * m + 2) as f64;
        let energy = (2 * m + 2) as f64 * next;
        let ratio = t2 * (2 * m + 3) as f64 / (2 * m + 2) as f64;
        let energy_ok = energy == 0.0 || (ratio < 1.0 && energy / (1.0 - ratio) <= 1e-7 * nbar);
        if next / (1.0 - t2) <= LEAKAGE_TOL && energy_ok {
            return 2 * m + 1;
        }
        p = next;
        m += 1;
    }
}

/// Squeezed vacuum with squeezing argument `r`.
///
/// Only even levels are populated:
/// `c_{2m} = (sech r)^{1/2} (−tanh r)^m √((2m)!)/(2^m m!)`, so that
/// `⟨n⟩ = sinh² r`. The argument is the conventional one, with squeezing
/// operator `exp(½ r (a² − a†²))`; writing the exponent with `r²` (as some
/// texts do) changes only the parametrization, so callers reporting results
/// by mean energy should use [`squeezing_for_nbar`].
pub fn squeezed_vacuum(r: f64, dim: usize) -> Result<FockVector> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidArgument(format!("squeezing must be finite and >= 0, got {r}")));
    }
    let required = squeezed_min_dim(r);
    if dim < required {
        return Err(Error::InvalidArgument(format!(
            "squeezed vacuum with r = {r} needs dim >= {required}, got {dim}"
        )));
    }
    let t = r.tanh();
    let mut amps = Array1::from_elem(dim, C64::new(0.0, 0.0));
    let mut c = 1.0 / r.cosh().sqrt();
    let mut m = 0usize;
    while 2 * m < dim {
        amps[2 * m] = C64::new(c, 0.0);
        // c_{2m+2} / c_{2m} = −t √((2m+1)(2m+2)) / (2(m+1))
        c *= -t * (((2 * m + 1) * (2 * m + 2)) as f64).sqrt() / (2 * (m + 1)) as f64;
        m += 1;
    }
    Ok(FockVector::new(amps))
}

/// Fock state `|n⟩`.
pub fn fock_state(n: usize, dim: usize) -> Result<FockVector> {
    if n >= dim {
        return Err(Error::InvalidArgument(format!("Fock level {n} does not fit in dim {dim}")));
    }
    let mut amps = Array1::from_elem(dim, C64::new(0.0, 0.0));
    amps[n] = C64::new(1.0, 0.0);
    Ok(FockVector::new(amps))
}

/// Mixing angle θ = arcsin √(2n̄/(3 + cos 2φ)) of the qutrit probe.
pub fn qutrit_theta(nbar: f64, phi: f64) -> Result<f64> {
    let arg = 2.0 * nbar / (3.0 + (2.0 * phi).cos());
    if !(0.0..=1.0).contains(&arg) || !arg.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "qutrit with nbar = {nbar}, phi = {phi} is unreachable (sin^2 theta = {arg})"
        )));
    }
    Ok(arg.sqrt().asin())
}

/// `cos θ|0⟩ + e^{iμ} sin θ sin φ|1⟩ + e^{iν} sin θ cos φ|2⟩`, θ fixed by the
/// mean photon number.
pub fn qutrit_state(nbar: f64, phi: f64, mu: f64, nu: f64, dim: usize) -> Result<FockVector> {
    if dim < 3 {
        return Err(Error::InvalidArgument(format!("qutrit needs dim >= 3, got {dim}")));
    }
    let theta = qutrit_theta(nbar, phi)?;
    let mut amps = Array1::from_elem(dim, C64::new(0.0, 0.0));
    amps[0] = C64::new(theta.cos(), 0.0);
    amps[1] = C64::from_polar(theta.sin() * phi.sin(), mu);
    amps[2] = C64::from_polar(theta.sin() * phi.cos(), nu);
    Ok(FockVector::new(amps))
}

/// Input state of the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeSpec {
    Coherent { alpha: C64 },
    /// Conventional squeezing argument, `n̄ = sinh² r`.
    SqueezedVacuum { r: f64 },
    Fock { n: usize },
    Qutrit { nbar: f64, phi: f64, mu: f64, nu: f64 },
}

impl ProbeSpec {
    pub fn coherent(alpha: f64) -> Self {
        ProbeSpec::Coherent { alpha: C64::new(alpha, 0.0) }
    }

    pub fn squeezed_with_nbar(nbar: f64) -> Self {
        ProbeSpec::SqueezedVacuum { r: squeezing_for_nbar(nbar) }
    }

    /// Qutrit with the phases fixed at μ = ν = π.
    pub fn qutrit(nbar: f64, phi: f64) -> Self {
        ProbeSpec::Qutrit { nbar, phi, mu: PI, nu: PI }
    }

    pub fn kind(&self) -> ProbeKind {
        match self {
            ProbeSpec::Coherent { .. } => ProbeKind::Coherent,
            ProbeSpec::SqueezedVacuum { .. } => ProbeKind::SqueezedVacuum,
            ProbeSpec::Fock { .. } => ProbeKind::Fock,
            ProbeSpec::Qutrit { .. } => ProbeKind::Qutrit,
        }
    }

    /// Mean input energy.
    pub fn nbar(&self) -> f64 {
        match *self {
            ProbeSpec::Coherent { alpha } => alpha.norm_sqr(),
            ProbeSpec::SqueezedVacuum { r } => r.sinh().powi(2),
            ProbeSpec::Fock { n } => n as f64,
            ProbeSpec::Qutrit { nbar, .. } => nbar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ProbeSpec::Coherent { alpha } if !(alpha.re.is_finite() && alpha.im.is_finite()) => {
                Err(Error::InvalidArgument(format!("non-finite coherent amplitude {alpha}")))
            }
            ProbeSpec::SqueezedVacuum { r } if !(r.is_finite() && r >= 0.0) => {
                Err(Error::InvalidArgument(format!("squeezing must be finite and >= 0, got {r}")))
            }
            ProbeSpec::Qutrit { nbar, phi, .. } => {
                if !(0.0..=1.0).contains(&nbar) {
                    return Err(Error::InvalidArgument(format!("qutrit nbar must lie in [0, 1], got {nbar}")));
                }
                qutrit_theta(nbar, phi).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// Smallest dimension satisfying the leakage bound alone.
    pub fn leakage_dim(&self) -> usize {
        match *self {
            ProbeSpec::Coherent { alpha } => coherent_min_dim(alpha),
            ProbeSpec::SqueezedVacuum { r } => squeezed_min_dim(r),
            ProbeSpec::Fock { n } => n + 1,
            ProbeSpec::Qutrit { .. } => 3,
        }
    }

    /// The probe in a `dim`-level truncation.
    pub fn state(&self, dim: usize) -> Result<FockVector> {
        self.validate()?;
        match *self {
            ProbeSpec::Coherent { alpha } => coherent_state(alpha, dim),
            ProbeSpec::SqueezedVacuum { r } => squeezed_vacuum(r, dim),
            ProbeSpec::Fock { n } => fock_state(n, dim),
            ProbeSpec::Qutrit { nbar, phi, mu, nu } => qutrit_state(nbar, phi, mu, nu, dim),
        }
    }

    /// Closed-form QFI without Kerr nonlinearity, where one is known.
    pub fn linear_qfi(&self, gamma: f64, tau: f64) -> Option<f64> {
        let nbar = self.nbar();
        match self {
            ProbeSpec::Coherent { .. } => Some(metrology::qfi_coherent_analytic(nbar, gamma, tau)),
            ProbeSpec::SqueezedVacuum { .. } => Some(metrology::qfi_squeezed_analytic(nbar, gamma, tau)),
            ProbeSpec::Fock { .. } => Some(metrology::qfi_fock_analytic(nbar, gamma, tau)),
            ProbeSpec::Qutrit { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            ProbeSpec::Coherent { alpha } if alpha.im == 0.0 => format!("coherent(alpha={})", alpha.re),
            ProbeSpec::Coherent { alpha } => format!("coherent(alpha={}{:+}i)", alpha.re, alpha.im),
            ProbeSpec::SqueezedVacuum { r } => format!("squeezed(r={r}, nbar={})", self.nbar()),
            ProbeSpec::Fock { n } => format!("fock(n={n})"),
            ProbeSpec::Qutrit { nbar, phi, mu, nu } => format!("qutrit(nbar={nbar}, phi={phi}, mu={mu}, nu={nu})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    Coherent,
    #[serde(alias = "squeezed")]
    SqueezedVacuum,
    Fock,
    Qutrit,
}

impl ProbeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeKind::Coherent => "coherent",
            ProbeKind::SqueezedVacuum => "squeezed-vacuum",
            ProbeKind::Fock => "fock",
            ProbeKind::Qutrit => "qutrit",
        }
    }
}

impl std::str::FromStr for ProbeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" => Ok(ProbeKind::Coherent),
            "squeezed" | "squeezed-vacuum" => Ok(ProbeKind::SqueezedVacuum),
            "fock" => Ok(ProbeKind::Fock),
            "qutrit" => Ok(ProbeKind::Qutrit),
            other => Err(Error::Config(format!("unknown probe kind '{other}'"))),
        }
    }
}

/// Flat key/value description of a probe, as read from configuration.
///
/// Keys: `kind`, `alpha_re`, `alpha_im`, `r`, `n`, `nbar`, `phi`, `mu`,
/// `nu`. A squeezed vacuum may be given by `nbar` or by `r`; a qutrit needs
/// `nbar` and `phi`, with `mu` and `nu` defaulting to π.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub kind: Option<ProbeKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl ProbeConfig {
    pub fn to_spec(&self) -> Result<ProbeSpec> {
        let kind = self.kind.ok_or_else(|| Error::Config("probe kind missing".into()))?;
        let missing = |key: &str| Error::Config(format!("{} probe needs '{key}'", kind.as_str()));
        let spec = match kind {
            ProbeKind::Coherent => {
                let re = match (self.alpha_re, self.nbar) {
                    (Some(re), _) => re,
                    (None, Some(nbar)) if self.alpha_im.is_none() => nbar.sqrt(),
                    _ => return Err(missing("alpha_re")),
                };
                ProbeSpec::Coherent { alpha: C64::new(re, self.alpha_im.unwrap_or(0.0)) }
            }
            ProbeKind::SqueezedVacuum => match (self.r, self.nbar) {
                (Some(_), Some(_)) => return Err(Error::Config("give either 'r' or 'nbar' for a squeezed probe, not both".into())),
                (Some(r), None) => ProbeSpec::SqueezedVacuum { r },
                (None, Some(nbar)) => ProbeSpec::squeezed_with_nbar(nbar),
                (None, None) => return Err(missing("nbar")),
            },
            ProbeKind::Fock => ProbeSpec::Fock { n: self.n.ok_or_else(|| missing("n"))? },
            ProbeKind::Qutrit => ProbeSpec::Qutrit {
                nbar: self.nbar.ok_or_else(|| missing("nbar"))?,
                phi: self.phi.ok_or_else(|| missing("phi"))?,
                mu: self.mu.unwrap_or(PI),
                nu: self.nu.unwrap_or(PI),
            },
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }
}

impl From<&ProbeSpec> for ProbeConfig {
    fn from(spec: &ProbeSpec) -> Self {
        let mut cfg = ProbeConfig { kind: Some(spec.kind()), ..Default::default() };
        match *spec {
            ProbeSpec::Coherent { alpha } => {
                cfg.alpha_re = Some(alpha.re);
                cfg.alpha_im = Some(alpha.im);
            }
            ProbeSpec::SqueezedVacuum { r } => {
                cfg.r = Some(r);
                cfg.nbar = Some(spec.nbar());
            }
            ProbeSpec::Fock { n } => cfg.n = Some(n),
            ProbeSpec::Qutrit { nbar, phi, mu, nu } => {
                cfg.nbar = Some(nbar);
                cfg.phi = Some(phi);
                cfg.mu = Some(mu);
                cfg.nu = Some(nu);
            }
        }
        cfg
    }
}

/// Truncation dimension for a probe.
///
/// Starting from the leakage bound, the dimension grows until the numerical
/// QFI at λ = 0, γ = 1, τ = 1 matches the linear-channel closed form within
/// [`BASELINE_MATCH_TOL`]. Probes without a closed form (qutrits) use the
/// leakage bound alone.
pub fn required_dim(spec: &ProbeSpec, cap: usize) -> Result<usize> {
    spec.validate()?;
    let mut dim = spec.leakage_dim();
    if dim > cap {
        return Err(Error::DimensionCap { required: dim, cap });
    }
    let Some(baseline) = spec.linear_qfi(1.0, 1.0) else {
        return Ok(dim);
    };
    let params = ChannelParams::rescaled(1.0, 0.0, 1.0)?;
    loop {
        let probe = Probe::with_dim(*spec, dim)?;
        let h = metrology::qfi(&probe, &params)?.value;
        if (h - baseline).abs() <= BASELINE_MATCH_TOL * baseline {
            return Ok(dim);
        }
        let next = dim + (dim / 8).max(2);
        if next > cap {
            return Err(Error::DimensionCap { required: next, cap });
        }
        dim = next;
    }
}

/// A probe prepared in a fixed truncation.
#[derive(Debug, Clone)]
pub struct Probe {
    spec: ProbeSpec,
    state: FockVector,
    initial: DensityMatrix,
}

impl Probe {
    /// Prepares `spec` at the dimension chosen by [`required_dim`].
    pub fn prepare(spec: ProbeSpec, cap: usize) -> Result<Self> {
        let dim = required_dim(&spec, cap)?;
        Self::with_dim(spec, dim)
    }

    /// Prepares `spec` at an explicit dimension (leakage bound still applies).
    pub fn with_dim(spec: ProbeSpec, dim: usize) -> Result<Self> {
        let state = spec.state(dim)?;
        let initial = DensityMatrix::pure(&state);
        Ok(Self { spec, state, initial })
    }

    pub fn spec(&self) -> &ProbeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    pub fn state(&self) -> &FockVector {
        &self.state
    }

    pub fn initial(&self) -> &DensityMatrix {
        &self.initial
    }
}
