//! Command-line driver: single integrals, parameter sweeps, oracle
//! comparisons and the self-test suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;

use adaptive_levin::reference::Params;
use adaptive_levin::{AdaptiveConfig, Solver};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod compare;
pub mod format;
pub mod integrate;
pub mod problem;
pub mod selftest;
pub mod sweep;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or expressions (exit 2).
    Usage(String),
    /// Anything else (exit 1).
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<adaptive_levin::Error> for CliError {
    fn from(e: adaptive_levin::Error) -> Self {
        use adaptive_levin::Error as E;
        match e {
            E::Syntax { .. }
            | E::UnknownIdentifier { .. }
            | E::UnknownFunction { .. }
            | E::Arity { .. }
            | E::UnboundParameter(_)
            | E::UnknownIntegral(_)
            | E::MissingParameter { .. }
            | E::InvalidConfig(_)
            | E::InvalidInterval { .. }
            | E::InvalidOrder { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "levin",
    version,
    about = "Adaptive Levin quadrature for oscillatory integrals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one integral and print a JSON record.
    Integrate(integrate::IntegrateArgs),
    /// Evaluate a catalog integral over a log-spaced parameter range.
    Sweep(sweep::SweepArgs),
    /// Time Levin against adaptive Gauss–Legendre over random parameter draws.
    Compare(compare::CompareArgs),
    /// Run the invariant suite.
    Selftest(selftest::SelftestArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverArg {
    #[default]
    Qr,
    Svd,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EpsScale {
    #[default]
    None,
    /// Use machine epsilon times the square root of the `kappa` parameter.
    SqrtKappa,
}

/// Quadrature settings shared by all evaluating subcommands.
#[derive(Args, Clone, Debug)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
    #[arg(long, default_value_t = 12)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Qr)]
    pub solver: SolverArg,
    /// Replaces --eps by a frequency-scaled tolerance.
    #[arg(long = "eps-scale", value_enum, default_value_t = EpsScale::None)]
    pub eps_scale: EpsScale,
    /// Use only the whole-vs-halves test, without the stationary point guard.
    #[arg(long = "no-stationary-guard")]
    pub no_stationary_guard: bool,
    /// Maximum number of intervals taken from the worklist.
    #[arg(long = "max-intervals", default_value_t = 1 << 20)]
    pub max_intervals: usize,
}

impl SolverArgs {
    /// The tolerance for a run at `params`.
    pub fn eps_for(&self, params: &Params) -> Result<f64, CliError> {
        match self.eps_scale {
            EpsScale::None => Ok(self.eps),
            EpsScale::SqrtKappa => {
                let kappa = params
                    .get("kappa")
                    .copied()
                    .ok_or_else(|| CliError::Usage("--eps-scale sqrt-kappa needs a kappa parameter".into()))?;
                if !(kappa > 0.0) {
                    return Err(CliError::Usage(format!("kappa must be positive, got {kappa}")));
                }
                Ok(f64::EPSILON * kappa.sqrt())
            }
        }
    }

    pub fn config(&self, params: &Params) -> Result<AdaptiveConfig, CliError> {
        let mut cfg = AdaptiveConfig::default()
            .with_eps(self.eps_for(params)?)
            .with_k(self.k)
            .with_solver(match self.solver {
                SolverArg::Qr => Solver::Qr,
                SolverArg::Svd => Solver::Svd,
            });
        cfg.max_intervals = self.max_intervals;
        if self.no_stationary_guard {
            cfg.stationary_phase_limit = None;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs a parsed command, writing results to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Integrate(a) => integrate::run(&a, out),
        Command::Sweep(a) => sweep::run(&a, out),
        Command::Compare(a) => compare::run(&a, out),
        Command::Selftest(a) => selftest::run(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                CliError::Usage(_) => EXIT_USAGE,
                CliError::Runtime(_) => EXIT_FAILED,
            }
        }
    }
}
