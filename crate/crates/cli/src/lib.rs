//! The `engel` command line: integrate extremals, iterate the Poincaré map,
//! connect two configurations, render trajectories and check the frame
//! geometry.
//!
//! Exit codes are a stable contract: 0 success, 2 usage, 3 numeric failure,
//! 4 no boundary-value solution, 5 diagnostic failure.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{cmd_check, cmd_connect, cmd_integrate, cmd_poincare, cmd_render};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

/// Environment variable naming the directory for outputs whose path is not
/// given explicitly.
pub const OUTPUT_DIR_ENV: &str = "ENGEL_OUTPUT_DIR";

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const NO_SOLUTION: i32 = 4;
    pub const DIAGNOSTIC: i32 = 5;
}

/// Failure of a command, mapped onto the exit-code contract.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("diagnostic failure: {0}")]
    Diagnostic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io(_) | CliError::Numeric(_) => exit::NUMERIC,
            CliError::NoSolution(_) => exit::NO_SOLUTION,
            CliError::Diagnostic(_) => exit::DIAGNOSTIC,
        }
    }
}

/// A configuration point given as `x,y,theta,k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointArg(pub engel_core::ConfigurationPoint);

impl std::str::FromStr for PointArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 4 {
            return Err(format!("expected x,y,theta,k but got {s:?}"));
        }
        let mut v = [0.0; 4];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.trim().parse().map_err(|_| format!("not a number: {p:?}"))?;
        }
        engel_core::ConfigurationPoint::try_new(v[0], v[1], v[2], v[3])
            .map(PointArg)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "engel",
    version,
    about = "Sub-Riemannian geodesics of positions, orientations and curvatures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a naturally parameterized normal extremal.
    Integrate(IntegrateArgs),
    /// Iterate the return map of the section k = 0.
    Poincare(PoincareArgs),
    /// Connect two configurations by extremals.
    Connect(ConnectArgs),
    /// Render a trajectory file as SVG.
    Render(RenderArgs),
    /// Check frame, bracket and first-integral identities at random points.
    Check(CheckArgs),
}

/// Integrator tolerances and the optional JSON config file.
#[derive(Debug, Clone, Default, Args)]
pub struct NumericArgs {
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Flat JSON object with integrator and shooting options.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IntegrateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub q0: PointArg,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub h30: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub h40: f64,
    /// Duration, equal to the length of the curve.
    #[arg(long = "T")]
    pub duration: f64,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PoincareArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub h30: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub h40: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub iters: u64,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConnectArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub q0: PointArg,
    #[arg(long, allow_hyphen_values = true)]
    pub q1: PointArg,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub max_newton_iters: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Number of osculating circles, evenly spaced in t.
    #[arg(long, default_value_t = 5)]
    pub circles: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// `explicit`, or `default_name` inside the output directory.
pub fn output_path(explicit: Option<&Path>, default_name: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
            .join(default_name),
    }
}

/// Parses `args` (without the program name) and runs the command, writing
/// reports to `out`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("engel")).chain(args)) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return exit::USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return exit::SUCCESS;
        }
    };
    let result = match &cli.command {
        Command::Integrate(a) => cmd_integrate(a, &argv, out).map(|_| ()),
        Command::Poincare(a) => cmd_poincare(a, &argv, out).map(|_| ()),
        Command::Connect(a) => cmd_connect(a, &argv, out).map(|_| ()),
        Command::Render(a) => cmd_render(a, &argv, out).map(|_| ()),
        Command::Check(a) => cmd_check(a, out).map(|_| ()),
    };
    match result {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            let _ = writeln!(err, "engel: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_argument_parses() {
        let p: PointArg = "-1,2.5,0.3,-4".parse().unwrap();
        assert_eq!(p.0, engel_core::ConfigurationPoint::new(-1.0, 2.5, 0.3, -4.0));
        assert!("1,2,3".parse::<PointArg>().is_err());
        assert!("1,2,x,4".parse::<PointArg>().is_err());
        assert!("1,2,inf,4".parse::<PointArg>().is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(
            [
                "integrate",
                "--q0",
                "0,0,0,0",
                "--alpha0",
                "0",
                "--h30",
                "0",
                "--h40",
                "0",
            ],
            &mut out,
            &mut err,
        );
        assert_eq!(code, exit::USAGE);
        assert!(String::from_utf8(err).unwrap().contains("--T"));
        let code = run_with(
            ["poincare", "--alpha0", "1", "--h30", "1", "--h40", "0", "--iters", "0"],
            &mut out,
            &mut Vec::new(),
        );
        assert_eq!(code, exit::USAGE);
        assert_eq!(run_with(["frobnicate"], &mut out, &mut Vec::new()), exit::USAGE);
    }

    #[test]
    fn help_exits_with_zero() {
        let mut out = Vec::new();
        assert_eq!(run_with(["--help"], &mut out, &mut Vec::new()), exit::SUCCESS);
        assert!(String::from_utf8(out).unwrap().contains("connect"));
    }
}
