//! Configuration-driven command-line front end: build states, run
//! flows, and emit trajectory, invariant, and spectral tables.
//!
//! Every command reads one JSON config (see [`crate::config`]), runs
//! deterministically, writes its tables under the output directory, and
//! prints a one-line summary to stdout. Failures exit with code 2 for
//! config and schema problems, 3 when the initial data violates the
//! moment-map constraint, and 4 for numerical trouble mid-run.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::config::{self, FormatName, RunConfig};
use crate::error::Error;
use crate::flows::{run_flow, Trajectory};
use crate::ham::{self, DEFAULT_BRACKET_STEP};
use crate::phase::{check_constraint, from_particles, to_particles, PhasePoint, CONSTRAINT_TOLERANCE};
use crate::specfun::Variant;
use crate::{io, Result};

/// Name of the environment variable capping sweep parallelism.
pub const THREADS_VAR: &str = "CM_LAX_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cm-lax", version, about = "Spin Calogero-Moser flows and their conserved data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Target chart for the conversion command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    Particle,
    Quiver,
}

/// Output format override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl FormatArg {
    fn to_name(self) -> FormatName {
        match self {
            FormatArg::Csv => FormatName::Csv,
            FormatArg::Json => FormatName::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured flow and write trajectory, invariant, and
    /// (if enabled) spectral tables.
    Simulate {
        /// Path to the JSON run configuration.
        config: PathBuf,
        /// Output directory, overriding the config's `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Table format, overriding the config's `output.format`.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Convert the initial state between particle and quiver charts
    /// and write the result.
    Convert {
        /// Path to the JSON run configuration.
        config: PathBuf,
        /// Chart to convert into.
        #[arg(long, value_enum)]
        to: ChartArg,
        /// Output directory, overriding the config's `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Table format, overriding the config's `output.format`.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Evaluate the configured Hamiltonians and their pairwise Poisson
    /// brackets at the initial state and write the bracket table.
    Invariants {
        /// Path to the JSON run configuration.
        config: PathBuf,
        /// Output directory, overriding the config's `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Table format, overriding the config's `output.format`.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

/// Validates the parallelism cap. Single runs never fan out, so only
/// well-formedness matters here; a malformed value is still reported as
/// a config error rather than silently ignored.
fn check_thread_cap() -> Result<()> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => Err(Error::Config {
            message: format!("{THREADS_VAR} is not valid unicode"),
        }),
        Ok(value) => match value.parse::<usize>() {
            Ok(cap) if cap >= 1 => Ok(()),
            _ => Err(Error::Config {
                message: format!("{THREADS_VAR} must be a positive integer, got {value:?}"),
            }),
        },
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        message: format!("cannot read config {}: {e}", path.display()),
    })?;
    let config = config::parse(&text)?;
    config.validate()?;
    Ok(config)
}

fn resolve_output(
    config: &RunConfig,
    out: &Option<PathBuf>,
    format: &Option<FormatArg>,
) -> (PathBuf, FormatName) {
    let dir = out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let format = format.map_or(config.output.format, FormatArg::to_name);
    (dir, format)
}

fn write_table(dir: &Path, name: &str, format: FormatName, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.{}", format.extension()));
    fs::write(&path, text)?;
    Ok(path)
}

/// Moment-map residual of the initial state, when the chart has one:
/// quiver data directly, rational and trigonometric particle data via
/// conversion. Elliptic particle data has no quiver chart and yields
/// `None`.
fn moment_residual(point: &PhasePoint) -> Option<f64> {
    match point {
        PhasePoint::Quiver(d) => check_constraint(d, CONSTRAINT_TOLERANCE).ok().map(|r| r.1),
        PhasePoint::Particle(s) => match s.variant {
            Variant::Elliptic(_) => None,
            _ => from_particles(s)
                .and_then(|d| check_constraint(&d, CONSTRAINT_TOLERANCE))
                .ok()
                .map(|r| r.1),
        },
    }
}

fn max_invariant_drift(traj: &Trajectory) -> f64 {
    let Some(first) = traj.invariant_log.values.first() else {
        return 0.0;
    };
    traj.invariant_log
        .values
        .iter()
        .flat_map(|row| row.iter().zip(first).map(|(v, v0)| (v - v0).norm()))
        .fold(0.0, f64::max)
}

fn max_moment_residual(traj: &Trajectory) -> Option<f64> {
    let residuals: Vec<f64> = traj.states.iter().filter_map(moment_residual).collect();
    if residuals.is_empty() {
        None
    } else {
        Some(residuals.into_iter().fold(0.0, f64::max))
    }
}

fn cmd_simulate(path: &Path, out: &Option<PathBuf>, format: &Option<FormatArg>) -> Result<()> {
    let config = load_config(path)?;
    let point = config.build_initial()?;
    if let PhasePoint::Quiver(d) = &point {
        let (on_shell, residual) = check_constraint(d, CONSTRAINT_TOLERANCE)?;
        if !on_shell {
            return Err(Error::Constraint {
                message: "initial data violates the moment-map constraint".to_string(),
                residual,
            });
        }
    }
    let spec = config.build_flow_spec()?;
    let log = config.build_log_spec()?;
    let traj = run_flow(&point, &spec, &log)?;

    let (dir, format) = resolve_output(&config, out, format);
    match format {
        FormatName::Csv => {
            write_table(&dir, "trajectory", format, &io::trajectory_csv(&traj))?;
            write_table(&dir, "invariants", format, &io::invariants_csv(&traj))?;
            if !traj.invariant_log.spectral.is_empty() {
                write_table(&dir, "spectral", format, &io::spectral_csv(&traj))?;
            }
        }
        FormatName::Json => {
            write_table(&dir, "trajectory", format, &io::trajectory_json(&traj))?;
            write_table(&dir, "invariants", format, &io::invariants_json(&traj))?;
            if !traj.invariant_log.spectral.is_empty() {
                write_table(&dir, "spectral", format, &io::spectral_json(&traj))?;
            }
        }
    }

    let residual_text = match max_moment_residual(&traj) {
        Some(r) => format!("{r:e}"),
        None => "n/a".to_string(),
    };
    println!(
        "final time = {}, max invariant drift = {:e}, max moment residual = {}",
        traj.times.last().expect("trajectory records at least t = 0"),
        max_invariant_drift(&traj),
        residual_text
    );
    Ok(())
}

fn cmd_convert(
    path: &Path,
    to: ChartArg,
    out: &Option<PathBuf>,
    format: &Option<FormatArg>,
) -> Result<()> {
    let config = load_config(path)?;
    let point = config.build_initial()?;
    let converted = match (to, &point) {
        (ChartArg::Particle, PhasePoint::Quiver(d)) => PhasePoint::Particle(to_particles(d)?),
        (ChartArg::Quiver, PhasePoint::Particle(s)) => PhasePoint::Quiver(from_particles(s)?),
        _ => point,
    };
    let (dir, format) = resolve_output(&config, out, format);
    let text = match format {
        FormatName::Csv => io::state_csv(&converted),
        FormatName::Json => io::state_json(&converted),
    };
    let written = write_table(&dir, "converted", format, &text)?;
    let chart = match &converted {
        PhasePoint::Particle(_) => "particle",
        PhasePoint::Quiver(_) => "quiver",
    };
    println!(
        "wrote {} ({chart} chart, n = {})",
        written.display(),
        converted.n()
    );
    Ok(())
}

fn cmd_invariants(path: &Path, out: &Option<PathBuf>, format: &Option<FormatArg>) -> Result<()> {
    let config = load_config(path)?;
    let point = config.build_initial()?;
    if let PhasePoint::Quiver(d) = &point {
        let (on_shell, residual) = check_constraint(d, CONSTRAINT_TOLERANCE)?;
        if !on_shell {
            eprintln!(
                "warning: initial data is off-shell (residual {residual:.3e}); \
                 evaluations proceed at the chart level"
            );
        }
    }
    let specs: Vec<_> = config.invariants.iter().map(|h| h.to_spec()).collect();
    let labels: Vec<String> = specs.iter().map(|h| h.label()).collect();
    let values = specs
        .iter()
        .map(|h| ham::evaluate(h, &point))
        .collect::<Result<Vec<Complex64>>>()?;
    let mut magnitudes = vec![vec![0.0; specs.len()]; specs.len()];
    for (i, hi) in specs.iter().enumerate() {
        for (j, hj) in specs.iter().enumerate() {
            magnitudes[i][j] = ham::poisson_bracket(hi, hj, &point, DEFAULT_BRACKET_STEP)?.norm();
        }
    }
    let max_bracket = magnitudes
        .iter()
        .flatten()
        .fold(0.0, |acc: f64, m| acc.max(*m));

    let (dir, format) = resolve_output(&config, out, format);
    let text = match format {
        FormatName::Csv => io::bracket_csv(&labels, &values, &magnitudes),
        FormatName::Json => io::bracket_json(&labels, &values, &magnitudes),
    };
    write_table(&dir, "invariants", format, &text)?;
    println!(
        "evaluated {} hamiltonians, max bracket magnitude = {max_bracket:e}",
        specs.len()
    );
    Ok(())
}

/// Dispatches one parsed invocation.
pub fn run(cli: &Cli) -> Result<()> {
    check_thread_cap()?;
    match &cli.command {
        Command::Simulate {
            config,
            out,
            format,
        } => cmd_simulate(config, out, format),
        Command::Convert {
            config,
            to,
            out,
            format,
        } => cmd_convert(config, *to, out, format),
        Command::Invariants {
            config,
            out,
            format,
        } => cmd_invariants(config, out, format),
    }
}
