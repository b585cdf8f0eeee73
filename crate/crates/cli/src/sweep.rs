use std::fs::File;
use std::io::Write;

use adaptive_levin::reference::Params;
use clap::Args;
use rayon::prelude::*;

use crate::format::{short, sig17, timed};
use crate::problem::{parse_assignment, parse_params, ProblemArgs, Source};
use crate::{CliError, EpsScale, SolverArgs, EXIT_FAILED, EXIT_OK};

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Parameter swept as 10^x for x equispaced over --decades.
    #[arg(long, default_value = "lambda")]
    pub sweep: String,
    /// Exponent range LO:HI.
    #[arg(long, default_value = "1:7")]
    pub decades: String,
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Extra parameter taking each listed value, e.g. m=2,3,4. Repeatable.
    #[arg(long = "grid-param", value_name = "NAME=V1,V2,...")]
    pub grid_params: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
    /// Leave the seconds column empty so that output is reproducible.
    #[arg(long = "no-timing")]
    pub no_timing: bool,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
}

/// Parses `LO:HI` into a pair of floats.
pub fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("expected LO:HI, got `{s}`")))?;
    let p = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("bad range bound `{t}`")))
    };
    Ok((p(lo)?, p(hi)?))
}

/// `count` exponents equispaced over `[lo, hi]`.
pub fn exponents(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn parse_grid(spec: &str) -> Result<(String, Vec<f64>), CliError> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected NAME=V1,V2,..., got `{spec}`")))?;
    let vals = values
        .split(',')
        .map(|v| parse_assignment(&format!("{name}={v}")).map(|(_, x)| x))
        .collect::<Result<Vec<_>, _>>()?;
    if vals.is_empty() {
        return Err(CliError::Usage(format!("no values in `{spec}`")));
    }
    Ok((name.trim().to_string(), vals))
}

/// Cartesian product of the grid, first parameter outermost.
fn grid_points(grid: &[(String, Vec<f64>)]) -> Vec<Vec<f64>> {
    grid.iter().fold(vec![Vec::new()], |acc, (_, vals)| {
        acc.iter()
            .flat_map(|prefix| {
                vals.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}

struct Row {
    params: Vec<f64>,
    cells: Vec<String>,
    converged: bool,
}

fn evaluate(
    source: &Source,
    solver: &SolverArgs,
    params: &Params,
    repeats: usize,
    timing: bool,
) -> (Vec<String>, bool) {
    let attempt = || -> Result<(Vec<String>, bool), CliError> {
        let cfg = solver.config(params)?;
        let problem = source.instantiate(params)?;
        let (r, secs) = timed(repeats, || problem.integrate(&cfg))?;
        let err = problem
            .closed_form()
            .map(|c| sig17((r.value - c).norm()))
            .unwrap_or_default();
        let seconds = if timing { sig17(secs) } else { String::new() };
        Ok((
            vec![
                sig17(r.value.re),
                sig17(r.value.im),
                err,
                r.intervals_used.to_string(),
                r.fevals.to_string(),
                seconds,
                r.status.as_str().to_string(),
            ],
            r.status.is_converged(),
        ))
    };
    attempt().unwrap_or_else(|e| {
        let mut cells = vec![String::new(); 6];
        cells.push(format!("error: {e}"));
        (cells, false)
    })
}

pub fn run(args: &SweepArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let source = Source::from_args(&args.problem)?;
    let fixed = parse_params(&args.problem.params)?;
    let (lo, hi) = parse_range(&args.decades)?;
    if args.count == 0 || lo > hi {
        return Err(CliError::Usage(format!(
            "empty sweep range {}:{} with count {}",
            lo, hi, args.count
        )));
    }
    let grid = args
        .grid_params
        .iter()
        .map(|s| parse_grid(s))
        .collect::<Result<Vec<_>, _>>()?;
    if grid.iter().any(|(n, _)| *n == args.sweep) {
        return Err(CliError::Usage(format!("`{}` is both swept and gridded", args.sweep)));
    }
    // with a scaled tolerance the config depends on the row
    if args.solver.eps_scale == EpsScale::None {
        args.solver.config(&fixed)?;
    }

    let xs = exponents(lo, hi, args.count);
    let jobs: Vec<Vec<f64>> = grid_points(&grid)
        .into_iter()
        .flat_map(|g| {
            xs.iter().map(move |x| {
                let mut row = vec![10f64.powf(*x)];
                row.extend(&g);
                row
            })
        })
        .collect();

    let rows: Vec<Row> = jobs
        .into_par_iter()
        .map(|values| {
            let mut params = fixed.clone();
            params.insert(args.sweep.clone(), values[0]);
            for ((name, _), v) in grid.iter().zip(&values[1..]) {
                params.insert(name.clone(), *v);
            }
            let (cells, converged) = evaluate(&source, &args.solver, &params, args.repeats, !args.no_timing);
            Row {
                params: values,
                cells,
                converged,
            }
        })
        .collect();

    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(&mut *out),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec![args.sweep.clone()];
    header.extend(grid.iter().map(|(n, _)| n.clone()));
    header.extend(
        [
            "value_re",
            "value_im",
            "abs_error_vs_closed_form",
            "intervals",
            "fevals",
            "seconds",
            "status",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for row in &rows {
        let mut rec: Vec<String> = row.params.iter().map(|v| short(*v)).collect();
        rec.extend(row.cells.iter().cloned());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(if rows.iter().all(|r| r.converged) {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}
