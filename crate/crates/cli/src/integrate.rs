use std::io::Write;

use adaptive_levin::QuadResult;
use clap::Args;

use crate::format::{json_number, timed};
use crate::problem::{parse_params, ProblemArgs, Source};
use crate::{CliError, SolverArgs, EXIT_FAILED, EXIT_OK};

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Report the median time of this many runs.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
}

/// The JSON record printed for one integral.
pub fn json_record(r: &QuadResult, seconds: f64) -> String {
    format!(
        "{{\"value_re\":{},\"value_im\":{},\"intervals\":{},\"fevals\":{},\"status\":\"{}\",\"seconds\":{}}}",
        json_number(r.value.re),
        json_number(r.value.im),
        r.intervals_used,
        r.fevals,
        r.status.as_str(),
        json_number(seconds),
    )
}

pub fn run(args: &IntegrateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let source = Source::from_args(&args.problem)?;
    let params = parse_params(&args.problem.params)?;
    let cfg = args.solver.config(&params)?;
    let problem = source.instantiate(&params)?;
    let (r, seconds) = timed(args.repeats, || problem.integrate(&cfg))?;
    writeln!(out, "{}", json_record(&r, seconds))?;
    Ok(if r.status.is_converged() { EXIT_OK } else { EXIT_FAILED })
}
