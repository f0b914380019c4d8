//! `inerton`: dispersion sweeps, mode integration, resonance curves and the
//! closed-form calculators from the command line.
//!
//! Exit status is 0 on success, 1 on usage and file errors, 2 on malformed
//! or invalid models. CSV goes to `--out` or standard output; every CSV
//! starts with `#` lines echoing the effective parameters.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "inerton",
    version,
    about = "Lattice dynamics with an atom-coupled cloud field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Branch frequencies over a wavevector grid.
    Dispersion(DispersionArgs),
    /// Free or driven time evolution of the collective coordinates.
    Integrate(IntegrateArgs),
    /// Steady-state amplitude against drive frequency for one mode.
    Resonance(ResonanceArgs),
    /// Thermal velocity, de Broglie wavelength and cloud amplitude.
    Kinematics(KinematicsArgs),
    /// Resonator path lengths, spectral window and geometry check.
    Resonator(ResonatorArgs),
    /// Check a model file for symmetry, sum-rule and cutoff violations.
    Validate(ModelArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Model file. Defaults to the built-in reference chain (8 sites,
    /// g0 = 4 Å, M = 30 M_p, C = 10 N/m, coupling 1e12 1/s).
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DispersionArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Points per axis. Defaults to the periodic box of the model.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// CSV output path [default: standard output].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CloudArg {
    /// Full atom-cloud equations.
    Coupled,
    /// Cloud follows the drive alone (strong-drive approximation).
    Prescribed,
}

#[derive(Debug, Args)]
struct ModeArgs {
    /// Grid index of the mode (natural grid of the model). See each
    /// command for the default.
    #[arg(long, value_name = "I")]
    k_index: Option<usize>,
    /// Branch whose polarization defines the scalar mode.
    #[arg(long, value_name = "S", default_value_t = 0)]
    branch: usize,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    mode: ModeArgs,
    /// Integrate full polarization vectors instead of one branch.
    #[arg(long)]
    matrix: bool,
    /// Polarization component written to the CSV in matrix mode.
    #[arg(long, value_name = "C", default_value_t = 0)]
    component: usize,
    /// Time step, s [default: 0.02 / fastest rate of the selected modes].
    #[arg(long, value_name = "S")]
    dt: Option<f64>,
    /// End time, s [default: 100 periods of the slowest selected mode].
    #[arg(long, value_name = "S")]
    t_end: Option<f64>,
    /// Record every N-th step [default: about 1000 samples].
    #[arg(long, value_name = "N")]
    stride: Option<usize>,
    /// Friction rate on the atom coordinate, 1/s.
    #[arg(long, value_name = "RATE", default_value_t = 0.0)]
    eta: f64,
    /// Drive amplitude on the cloud equation.
    #[arg(long, value_name = "F", default_value_t = 0.0)]
    force: f64,
    /// Drive frequency, rad/s (required with a nonzero force).
    #[arg(long, value_name = "RAD_PER_S")]
    omega: Option<f64>,
    /// Initial atom amplitude of every selected mode, kg^½ m.
    #[arg(long, value_name = "A", default_value_t = 1e-23)]
    amplitude: f64,
    #[arg(long, value_enum, default_value_t = CloudArg::Coupled)]
    cloud: CloudArg,
    /// CSV output path [default: standard output].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ResonanceArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Grid index defaults to the last point of the natural grid (zone
    /// boundary).
    #[command(flatten)]
    mode: ModeArgs,
    /// Lower end of the sweep, rad/s [default: 0.5 Ω].
    #[arg(long, value_name = "RAD_PER_S")]
    omega_min: Option<f64>,
    /// Upper end of the sweep, rad/s [default: 1.5 Ω].
    #[arg(long, value_name = "RAD_PER_S")]
    omega_max: Option<f64>,
    #[arg(long, value_name = "N", default_value_t = 1001)]
    omega_steps: usize,
    /// Friction rate, 1/s [default: 0.01 Ω].
    #[arg(long, value_name = "RATE")]
    eta: Option<f64>,
    /// Drive amplitude.
    #[arg(long, value_name = "F", default_value_t = 1.0)]
    force: f64,
    /// CSV output path [default: standard output].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KinematicsArgs {
    /// Particle mass in proton masses.
    #[arg(long, value_name = "X", default_value_t = 30.0)]
    mass_amu: f64,
    /// Temperature for the thermal velocity, K.
    #[arg(long, value_name = "K", default_value_t = 293.0)]
    temperature: f64,
    /// Use this velocity (m/s) instead of the thermal one.
    #[arg(long, value_name = "M_PER_S")]
    velocity: Option<f64>,
    /// Lattice constant, m; adds the overlap ratio Λ/g0.
    #[arg(long, value_name = "M")]
    g0: Option<f64>,
    /// Also list the orbital and rotational Earth flows.
    #[arg(long)]
    earth: bool,
    /// CSV output path (the table always goes to standard output).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ResonatorArgs {
    /// Sphere radius, m [default: Earth].
    #[arg(long, value_name = "M")]
    radius: Option<f64>,
    /// Debye frequency bounding the window from below, Hz.
    #[arg(long, value_name = "HZ", default_value_t = 1e13)]
    nu_debye: f64,
    /// Largest resonator dimension, m.
    #[arg(long, value_name = "M", default_value_t = 0.12)]
    l_max: f64,
    /// Check a resonator with horizontal LT and vertical LR dimensions, m.
    #[arg(long, num_args = 2, value_names = ["LT", "LR"])]
    check: Option<Vec<f64>>,
    /// Relative tolerance on LT/LR against π/2.
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    /// List the first N harmonics of the checked resonator.
    #[arg(long, value_name = "N")]
    harmonics: Option<usize>,
    /// CSV output path (the table always goes to standard output).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version also arrive here
            if !err.use_stderr() {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let text = err.render().to_string();
            eprint!(
                "usage error: {}",
                text.strip_prefix("error: ").unwrap_or(&text)
            );
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Dispersion(args) => commands::dispersion(args),
        Command::Integrate(args) => commands::integrate(args),
        Command::Resonance(args) => commands::resonance(args),
        Command::Kinematics(args) => commands::kinematics(args),
        Command::Resonator(args) => commands::resonator(args),
        Command::Validate(args) => commands::validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}

impl From<CloudArg> for inerton_lattice::dynamics::CloudEquation {
    fn from(arg: CloudArg) -> Self {
        match arg {
            CloudArg::Coupled => inerton_lattice::dynamics::CloudEquation::Coupled,
            CloudArg::Prescribed => inerton_lattice::dynamics::CloudEquation::Prescribed,
        }
    }
}
