use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use super::{parse_grid, Experiment, RatioModeKind, SweepConfig, SweepResult};
use crate::states::ProbeKind;
use crate::{Error, Result};

/// Exit status for invalid configuration.
const EXIT_CONFIG: i32 = 2;
/// Exit status for failures while computing.
const EXIT_NUMERIC: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "kerr-loss", version, about = "Loss-rate estimation in a lossy Kerr channel: Fisher-information sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// QFI with and without Kerr along a time grid (primary axis: tau)
    GainVsTime(SweepArgs),
    /// Optimal-time gain over alpha (or nbar) x lambda (primary axis: alpha/nbar)
    OptimalGain(SweepArgs),
    /// Gain at one fixed small time over alpha (or nbar) x lambda (primary axis: alpha/nbar)
    SmallTimeGain(SweepArgs),
    /// Phase-optimized homodyne FI relative to the QFI (primary axis: alpha)
    QuadratureRatio(SweepArgs),
    /// Average optimal gain of random qutrit probes (primary axis: nbar)
    QutritGain(SweepArgs),
    /// Fidelity of the pure-state approximation (primary axis: tau)
    FidelityMap(SweepArgs),
    /// Linear-channel QFI of coherent, squeezed and Fock probes (primary axis: tau)
    Baselines(SweepArgs),
    /// Run a JSON configuration file
    Run {
        /// Path to a JSON sweep configuration
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; the metadata goes to <out>.json. Prints CSV to stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// One grid argument; a newtype so clap takes it as a single value.
#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn grid_arg(s: &str) -> std::result::Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Probe kind: coherent, squeezed, fock, qutrit
    #[arg(long)]
    probe: Option<ProbeKind>,
    /// Coherent amplitude(s): value, list a,b,c, or lo:hi:steps
    #[arg(long, value_parser = grid_arg)]
    alpha: Option<Grid>,
    /// Mean photon number(s)
    #[arg(long, value_parser = grid_arg)]
    nbar: Option<Grid>,
    /// Squeezing argument (alternative to --nbar)
    #[arg(long)]
    r: Option<f64>,
    /// Fock level
    #[arg(long)]
    n: Option<usize>,
    /// Qutrit mixing angle
    #[arg(long)]
    phi: Option<f64>,
    /// Qutrit phase of |1>
    #[arg(long)]
    mu: Option<f64>,
    /// Qutrit phase of |2>
    #[arg(long)]
    nu: Option<f64>,
    /// Kerr strength(s) lambda = kerr/gamma
    #[arg(long, value_parser = grid_arg)]
    lambda: Option<Grid>,
    /// Rescaled time(s) tau = gamma t
    #[arg(long, value_parser = grid_arg)]
    tau: Option<Grid>,
    /// Grid for the subcommand's primary axis, lo:hi:steps
    #[arg(long, value_parser = grid_arg)]
    grid: Option<Grid>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path; the metadata goes to <out>.json. Prints CSV to stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest truncation dimension allowed
    #[arg(long, default_value_t = crate::states::DEFAULT_DIM_CAP)]
    dim_cap: usize,
    /// Fixed truncation (fidelity-map only)
    #[arg(long)]
    dim: Option<usize>,
    /// Number of random qutrit probes
    #[arg(long, default_value_t = super::DEFAULT_SAMPLES)]
    samples: usize,
    /// Bracket width at which time and phase searches stop
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Ratio mode for quadrature-ratio
    #[arg(long, value_enum, default_value_t = RatioModeKind::OptimalTime)]
    mode: RatioModeKind,
}

impl SweepArgs {
    fn into_config(self, experiment: Experiment) -> Result<(SweepConfig, Option<PathBuf>)> {
        let mut c = SweepConfig::new(experiment);
        c.probe.kind = self.probe;
        c.alpha = self.alpha.map(|g| g.0).unwrap_or_default();
        c.nbar = self.nbar.map(|g| g.0).unwrap_or_default();
        c.lambda = self.lambda.map(|g| g.0).unwrap_or_default();
        c.tau = self.tau.map(|g| g.0).unwrap_or_default();
        if let Some(grid) = self.grid {
            let kind = self.probe.unwrap_or(ProbeKind::Coherent);
            let axis = match experiment {
                Experiment::GainVsTime | Experiment::FidelityMap | Experiment::Baselines => &mut c.tau,
                Experiment::QutritGain => &mut c.nbar,
                Experiment::OptimalGain | Experiment::SmallTimeGain if kind == ProbeKind::SqueezedVacuum => &mut c.nbar,
                _ => &mut c.alpha,
            };
            if !axis.is_empty() {
                return Err(Error::Config("--grid sets the primary axis, which was also given explicitly".into()));
            }
            *axis = grid.0;
        }
        c.probe.r = self.r;
        c.probe.n = self.n;
        c.probe.phi = self.phi;
        c.probe.mu = self.mu;
        c.probe.nu = self.nu;
        c.gamma = self.gamma;
        c.seed = self.seed;
        c.dim_cap = self.dim_cap;
        c.dim = self.dim;
        c.samples = self.samples;
        c.tol = self.tol;
        c.mode = self.mode;
        Ok((c, self.out))
    }
}

/// Key column reported in the summary line.
fn headline(result: &SweepResult) -> &'static str {
    match result.experiment() {
        "quadrature-ratio-optimal-time" | "quadrature-ratio-fixed-time" => "ratio",
        "qutrit-gain" => "mean_gain",
        "fidelity-map" => "fidelity",
        "baselines" => "qfi_fock",
        _ => "gain",
    }
}

fn describe_row(result: &SweepResult, row: &[super::Cell]) -> String {
    const AXES: [&str; 4] = ["alpha", "nbar", "lambda", "tau"];
    result
        .columns()
        .iter()
        .zip(row)
        .filter(|(c, _)| AXES.contains(&c.as_str()))
        .filter_map(|(c, v)| v.as_f64().map(|x| format!("{c}={x:.4}")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn summary(result: &SweepResult) -> Result<String> {
    let key = headline(result);
    let values = result.column(key)?;
    let mut parts = vec![format!("{}: {} rows", result.experiment(), result.len())];
    if let Some(best) = result.argmax(key)? {
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        parts.push(format!("max {key} {max:.6e} at {}", describe_row(result, best)));
        parts.push(format!("min {key} {min:.6e}"));
    }
    let dims = result.dims();
    if let (Some(lo), Some(hi)) = (dims.first(), dims.last()) {
        parts.push(format!("dim {lo}..{hi}"));
    }
    Ok(parts.join("; "))
}

fn execute(config: SweepConfig, out: Option<PathBuf>) -> std::result::Result<String, (i32, Error)> {
    let config = config.resolved().map_err(|e| (EXIT_CONFIG, e))?;
    let result = config.run().map_err(|e| (EXIT_NUMERIC, e))?;
    let seed = (config.experiment == Experiment::QutritGain).then_some(config.seed);
    let mut line = summary(&result).map_err(|e| (EXIT_NUMERIC, e))?;
    match out {
        Some(path) => {
            result.save(&path, &config, seed).map_err(|e| (EXIT_NUMERIC, e))?;
            line.push_str(&format!("; wrote {}", path.display()));
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            result.write_csv(&mut lock).map_err(|e| (EXIT_NUMERIC, e))?;
            lock.flush().map_err(|e| (EXIT_NUMERIC, e.into()))?;
        }
    }
    Ok(line)
}

/// Parses arguments, runs the requested sweep and returns the exit status:
/// 0 on success, 2 for invalid arguments or configuration, 1 when a
/// computation fails (the message names the parameter point).
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let started = Instant::now();
    let to_stdout;
    let outcome = match cli.command {
        Command::Run { config, out } => {
            to_stdout = out.is_none();
            match std::fs::read_to_string(&config) {
                Ok(text) => match SweepConfig::from_json(&text) {
                    Ok(c) => execute(c, out),
                    Err(e) => Err((EXIT_CONFIG, e)),
                },
                Err(e) => Err((EXIT_CONFIG, Error::Config(format!("cannot read {}: {e}", config.display())))),
            }
        }
        command => {
            let (experiment, args) = match command {
                Command::GainVsTime(a) => (Experiment::GainVsTime, a),
                Command::OptimalGain(a) => (Experiment::OptimalGain, a),
                Command::SmallTimeGain(a) => (Experiment::SmallTimeGain, a),
                Command::QuadratureRatio(a) => (Experiment::QuadratureRatio, a),
                Command::QutritGain(a) => (Experiment::QutritGain, a),
                Command::FidelityMap(a) => (Experiment::FidelityMap, a),
                Command::Baselines(a) => (Experiment::Baselines, a),
                Command::Run { .. } => unreachable!(),
            };
            to_stdout = args.out.is_none();
            match args.into_config(experiment) {
                Ok((c, out)) => execute(c, out),
                Err(e) => Err((EXIT_CONFIG, e)),
            }
        }
    };
    match outcome {
        Ok(line) => {
            let line = format!("{line}; {:.2} s", started.elapsed().as_secs_f64());
            if to_stdout {
                eprintln!("{line}");
            } else {
                println!("{line}");
            }
            0
        }
        Err((code, e)) => {
            eprintln!("error: {e}");
            code
        }
    }
}
