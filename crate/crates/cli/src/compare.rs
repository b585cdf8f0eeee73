use std::fs::File;
use std::io::Write;

use adaptive_levin::oracle::DEFAULT_TOL;
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::format::{short, sig17, timed};
use crate::problem::{parse_params, ProblemArgs, Source};
use crate::sweep::parse_range;
use crate::{CliError, SolverArgs, EXIT_FAILED, EXIT_OK};

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Parameter drawn at random within each range.
    #[arg(long, default_value = "lambda")]
    pub sweep: String,
    /// Comma-separated LO:HI ranges of the swept parameter.
    #[arg(long, default_value = "1e0:1e1,1e1:1e2,1e2:1e3,1e3:1e4")]
    pub ranges: String,
    /// Draws per range.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long = "oracle-tol", default_value_t = DEFAULT_TOL)]
    pub oracle_tol: f64,
    /// Ranges extending beyond this value are not run through the oracle.
    #[arg(long = "max-oracle-lambda", default_value_t = 1e4)]
    pub max_oracle_lambda: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Median of this many timings per integral.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long)]
    pub out: Option<String>,
    /// Leave the timing columns empty so that output is reproducible.
    #[arg(long = "no-timing")]
    pub no_timing: bool,
}

/// Aggregates for one parameter range.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeSummary {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub avg_time_levin: f64,
    /// `None` when the range exceeds the oracle cap.
    pub avg_time_gauss: Option<f64>,
    pub max_abs_difference: Option<f64>,
    pub all_converged: bool,
}

impl RangeSummary {
    /// Gauss time over Levin time.
    pub fn ratio(&self) -> Option<f64> {
        self.avg_time_gauss.map(|g| g / self.avg_time_levin)
    }
}

pub fn parse_ranges(s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let out = s.split(',').map(parse_range).collect::<Result<Vec<_>, _>>()?;
    for &(lo, hi) in &out {
        if !(lo < hi) {
            return Err(CliError::Usage(format!("empty range {lo}:{hi}")));
        }
    }
    Ok(out)
}

/// Runs the comparison and returns one summary per range.
pub fn summarize(args: &CompareArgs) -> Result<Vec<RangeSummary>, CliError> {
    let source = Source::from_args(&args.problem)?;
    let fixed = parse_params(&args.problem.params)?;
    let ranges = parse_ranges(&args.ranges)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    if !(args.oracle_tol > 0.0) {
        return Err(CliError::Usage("--oracle-tol must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = Vec::with_capacity(ranges.len());
    for (lo, hi) in ranges {
        let use_oracle = hi <= args.max_oracle_lambda;
        let (mut t_levin, mut t_gauss) = (0.0, 0.0);
        let mut max_diff: f64 = 0.0;
        let mut all_converged = true;
        for _ in 0..args.samples {
            let v = rng.gen_range(lo..hi);
            let mut params = fixed.clone();
            params.insert(args.sweep.clone(), v);
            let cfg = args.solver.config(&params)?;
            let problem = source.instantiate(&params)?;
            let (r, t) = timed(args.repeats, || problem.integrate(&cfg))?;
            t_levin += t;
            all_converged &= r.status.is_converged();
            if use_oracle {
                let tol = match args.solver.eps_scale {
                    crate::EpsScale::None => args.oracle_tol,
                    crate::EpsScale::SqrtKappa => cfg.eps,
                };
                let (o, t) = timed(args.repeats, || problem.oracle(tol))?;
                t_gauss += t;
                all_converged &= o.status.is_converged();
                max_diff = max_diff.max((r.value - o.value).norm());
            }
        }
        let n = args.samples as f64;
        out.push(RangeSummary {
            lo,
            hi,
            samples: args.samples,
            avg_time_levin: t_levin / n,
            avg_time_gauss: use_oracle.then_some(t_gauss / n),
            max_abs_difference: use_oracle.then_some(max_diff),
            all_converged,
        });
    }
    Ok(out)
}

pub fn run(args: &CompareArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let rows = summarize(args)?;
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(&mut *out),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "range_lo",
        "range_hi",
        "samples",
        "avg_time_levin",
        "avg_time_gauss",
        "ratio",
        "max_abs_difference",
    ])?;
    let opt = |v: Option<f64>| v.map(sig17).unwrap_or_default();
    for r in &rows {
        let (tl, tg, ratio) = if args.no_timing {
            (String::new(), String::new(), String::new())
        } else {
            (sig17(r.avg_time_levin), opt(r.avg_time_gauss), opt(r.ratio()))
        };
        w.write_record([
            short(r.lo),
            short(r.hi),
            r.samples.to_string(),
            tl,
            tg,
            ratio,
            opt(r.max_abs_difference),
        ])?;
    }
    w.flush()?;
    Ok(if rows.iter().all(|r| r.all_converged) {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}
