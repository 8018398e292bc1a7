//! Parameter sweeps, their configuration, and the command-line front end.
//!
//! Every sweep returns a [`SweepResult`]; rows come back in grid order no
//! matter how the points were scheduled across threads, so a fixed
//! configuration (seed included) always produces byte-identical files.

mod cli;
mod sweeps;
mod table;

use serde::{Deserialize, Deserializer, Serialize};

use crate::numerics;
use crate::states::{ProbeConfig, ProbeKind, ProbeSpec, DEFAULT_DIM_CAP};
use crate::{Error, Result};

pub use cli::run_cli;
pub use sweeps::{
    axis_name, baselines, fidelity_map, gain_vs_time, optimal_gain_surface, optimal_qfi, quadrature_ratio_map, qutrit_average_gain,
    qutrit_phis, small_time_gain, RatioMode, SweepSettings, NEGATIVE_GAIN_TOL, TAU_MAX, TAU_MIN,
};
pub use table::{sidecar_path, Cell, SweepResult, GAIN_CONSISTENCY_TOL};

/// Default number of random qutrit probes.
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GainVsTime,
    OptimalGain,
    SmallTimeGain,
    QuadratureRatio,
    QutritGain,
    FidelityMap,
    Baselines,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::GainVsTime => "gain-vs-time",
            Experiment::OptimalGain => "optimal-gain",
            Experiment::SmallTimeGain => "small-time-gain",
            Experiment::QuadratureRatio => "quadrature-ratio",
            Experiment::QutritGain => "qutrit-gain",
            Experiment::FidelityMap => "fidelity-map",
            Experiment::Baselines => "baselines",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RatioModeKind {
    #[default]
    OptimalTime,
    FixedTime,
}

/// Parses `lo:hi:steps` (inclusive, `steps` points), a comma-separated list,
/// or a single number.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Config(format!("bad grid '{text}': {why}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("'{}' is not a number", s.trim())));
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [lo, hi, steps] => {
            let (lo, hi) = (number(lo)?, number(hi)?);
            let steps: usize = steps.trim().parse().map_err(|_| bad("steps must be a positive integer"))?;
            if steps == 0 {
                return Err(bad("steps must be a positive integer"));
            }
            if steps > 1 && !(lo < hi) {
                return Err(bad("need lo < hi"));
            }
            numerics::linspace(lo, hi, steps)
        }
        [single] => single.split(',').map(number).collect::<Result<Vec<f64>>>()?,
        _ => return Err(bad("expected lo:hi:steps or a comma-separated list")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}

fn grid<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        List(Vec<f64>),
        Scalar(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::List(v) => Ok(v),
        Raw::Scalar(x) => Ok(vec![x]),
        Raw::Text(s) => parse_grid(&s).map_err(serde::de::Error::custom),
    }
}

fn default_gamma() -> f64 {
    1.0
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_dim_cap() -> usize {
    DEFAULT_DIM_CAP
}

fn default_tol() -> f64 {
    1e-6
}

/// A complete, serializable description of one run.
///
/// Grids may be given as lists, single numbers, or `"lo:hi:steps"` strings.
/// Empty grids are replaced by per-experiment defaults in
/// [`SweepConfig::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default, deserialize_with = "grid")]
    pub alpha: Vec<f64>,
    #[serde(default, deserialize_with = "grid")]
    pub nbar: Vec<f64>,
    #[serde(default, deserialize_with = "grid")]
    pub lambda: Vec<f64>,
    #[serde(default, deserialize_with = "grid")]
    pub tau: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_dim_cap")]
    pub dim_cap: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub mode: RatioModeKind,
    /// Fixed truncation for the fidelity map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl SweepConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            probe: ProbeConfig::default(),
            alpha: Vec::new(),
            nbar: Vec::new(),
            lambda: Vec::new(),
            tau: Vec::new(),
            gamma: default_gamma(),
            seed: 0,
            samples: DEFAULT_SAMPLES,
            dim_cap: DEFAULT_DIM_CAP,
            tol: default_tol(),
            mode: RatioModeKind::default(),
            dim: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    fn probe_kind(&self) -> ProbeKind {
        self.probe.kind.unwrap_or(ProbeKind::Coherent)
    }

    /// Fills default grids and validates everything that can be checked
    /// without running the sweep.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        let fill = |v: &mut Vec<f64>, default: Vec<f64>| {
            if v.is_empty() {
                *v = default;
            }
        };
        let surface_alphas = vec![0.25, 0.5, 1.0, 1.5, 2.0];
        let surface_lambdas = vec![0.1, 0.5, 1.0, 2.0, 3.0];
        match c.experiment {
            Experiment::GainVsTime => {
                c.probe.kind.get_or_insert(ProbeKind::Coherent);
                match c.probe_kind() {
                    ProbeKind::Coherent if c.probe.alpha_re.is_none() && c.probe.nbar.is_none() => {
                        c.probe.alpha_re = Some(single("alpha", &c.alpha, 1.0)?);
                    }
                    ProbeKind::SqueezedVacuum | ProbeKind::Qutrit if c.probe.nbar.is_none() && c.probe.r.is_none() => {
                        c.probe.nbar = Some(single("nbar", &c.nbar, if c.probe_kind() == ProbeKind::Qutrit { 0.5 } else { 1.0 })?);
                    }
                    _ => {}
                }
                c.probe.to_spec()?;
                fill(&mut c.lambda, vec![0.5]);
                fill(&mut c.tau, numerics::linspace(0.02, 6.0, 300));
            }
            Experiment::OptimalGain | Experiment::SmallTimeGain => {
                match c.probe_kind() {
                    ProbeKind::Coherent => fill(&mut c.alpha, surface_alphas),
                    ProbeKind::SqueezedVacuum => fill(&mut c.nbar, vec![0.25, 0.5, 1.0, 2.0, 4.0]),
                    other => return Err(Error::Config(format!("{} needs a coherent or squeezed probe, got {}", c.experiment.as_str(), other.as_str()))),
                }
                fill(&mut c.lambda, surface_lambdas);
                if c.experiment == Experiment::SmallTimeGain {
                    fill(&mut c.tau, vec![0.1]);
                    single("tau", &c.tau, 0.1)?;
                }
            }
            Experiment::QuadratureRatio => {
                if c.probe_kind() != ProbeKind::Coherent {
                    return Err(Error::Config("quadrature-ratio uses coherent probes".into()));
                }
                fill(&mut c.alpha, surface_alphas);
                fill(&mut c.lambda, surface_lambdas);
                if c.mode == RatioModeKind::FixedTime {
                    fill(&mut c.tau, vec![0.1]);
                    single("tau", &c.tau, 0.1)?;
                }
            }
            Experiment::QutritGain => {
                fill(&mut c.nbar, numerics::linspace(0.1, 1.0, 10));
                fill(&mut c.lambda, numerics::linspace(0.1, 3.0, 30));
                if c.samples == 0 {
                    return Err(Error::Config("samples must be at least 1".into()));
                }
            }
            Experiment::FidelityMap => {
                fill(&mut c.alpha, vec![0.5, 0.75, 1.0]);
                fill(&mut c.lambda, numerics::linspace(0.0, 0.5, 11));
                fill(&mut c.tau, numerics::linspace(0.0, 5.0, 11));
            }
            Experiment::Baselines => {
                fill(&mut c.nbar, vec![1.0]);
                single("nbar", &c.nbar, 1.0)?;
                fill(&mut c.tau, numerics::linspace(0.05, 8.0, 160));
            }
        }
        if !(c.gamma.is_finite() && c.gamma > 0.0) {
            return Err(Error::Config(format!("gamma must be > 0, got {}", c.gamma)));
        }
        if !(c.tol > 0.0 && c.tol < 1.0) {
            return Err(Error::Config(format!("tol must lie in (0, 1), got {}", c.tol)));
        }
        if let Some(l) = c.lambda.iter().find(|l| **l < 0.0) {
            return Err(Error::Config(format!("lambda must be >= 0, got {l}")));
        }
        if let Some(t) = c.tau.iter().find(|t| **t < 0.0) {
            return Err(Error::Config(format!("tau must be >= 0, got {t}")));
        }
        Ok(c)
    }

    fn settings(&self) -> SweepSettings {
        SweepSettings { gamma: self.gamma, dim_cap: self.dim_cap, tol: self.tol }
    }

    /// Runs a resolved configuration.
    pub fn run(&self) -> Result<SweepResult> {
        let s = self.settings();
        let axis = |kind: ProbeKind| if kind == ProbeKind::Coherent { &self.alpha } else { &self.nbar };
        match self.experiment {
            Experiment::GainVsTime => {
                let spec: ProbeSpec = self.probe.to_spec()?;
                gain_vs_time(&spec, &self.lambda, &self.tau, &s)
            }
            Experiment::OptimalGain => optimal_gain_surface(self.probe_kind(), axis(self.probe_kind()), &self.lambda, &s),
            Experiment::SmallTimeGain => small_time_gain(self.probe_kind(), self.tau[0], axis(self.probe_kind()), &self.lambda, &s),
            Experiment::QuadratureRatio => {
                let mode = match self.mode {
                    RatioModeKind::OptimalTime => RatioMode::OptimalTime,
                    RatioModeKind::FixedTime => RatioMode::FixedTime(self.tau[0]),
                };
                quadrature_ratio_map(mode, &self.alpha, &self.lambda, &s)
            }
            Experiment::QutritGain => qutrit_average_gain(&self.nbar, &self.lambda, self.samples, self.seed, &s),
            Experiment::FidelityMap => fidelity_map(&self.alpha, &self.lambda, &self.tau, self.dim, &s),
            Experiment::Baselines => baselines(self.nbar[0], &self.tau, &s),
        }
    }
}

fn single(name: &str, grid: &[f64], default: f64) -> Result<f64> {
    match grid {
        [] => Ok(default),
        [x] => Ok(*x),
        _ => Err(Error::Config(format!("'{name}' takes a single value here, got {} values", grid.len()))),
    }
}
