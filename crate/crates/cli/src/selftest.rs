use std::io::Write;
use std::time::Instant;

use adaptive_levin::selftest::{checks, run as run_suite, Fault, SelfTestOptions};
use clap::Args;

use crate::{CliError, EXIT_FAILED, EXIT_OK};

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Only run the checks of this module.
    #[arg(long)]
    pub filter: Option<String>,
    /// Test hook: corrupt an internal table so that checks fail.
    #[arg(long = "inject-fault", hide = true)]
    pub inject_fault: Option<String>,
}

pub fn run(args: &SelftestArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if let Some(f) = &args.filter {
        if !checks().iter().any(|c| c.module == f) {
            return Err(CliError::Usage(format!("no checks for module `{f}`")));
        }
    }
    let fault = args
        .inject_fault
        .as_deref()
        .map(|s| s.parse::<Fault>().map_err(CliError::Usage))
        .transpose()?;
    let t = Instant::now();
    let outcomes = run_suite(&SelfTestOptions {
        filter: args.filter.clone(),
        fault,
    });
    let mut failed = 0;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failed += 1;
        }
        writeln!(out, "{tag} {}/{}: {} ({:.3}s)", o.module, o.name, o.detail, o.seconds)?;
    }
    writeln!(
        out,
        "{} passed, {} failed in {:.2}s",
        outcomes.len() - failed,
        failed,
        t.elapsed().as_secs_f64()
    )?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
}
