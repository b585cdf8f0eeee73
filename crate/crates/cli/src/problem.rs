//! Problems assembled from command-line flags.

use std::collections::HashMap;

use adaptive_levin::expr::parse_with_params;
use adaptive_levin::oracle::adaptive_gauss;
use adaptive_levin::reference::{integrand_for, IntegralId, Params, ReferenceProblem};
use adaptive_levin::{adaptive_integrate, AdaptiveConfig, Complex64, Integrand, Kernel, QuadResult};
use clap::{Args, ValueEnum};

use crate::CliError;

/// Flags that select the integrand.
#[derive(Args, Clone, Debug, Default)]
pub struct ProblemArgs {
    /// Catalog integral (I1–I9, I21, I22).
    #[arg(long = "paper-integral", value_name = "ID")]
    pub paper_integral: Option<String>,
    /// Real part of the amplitude f(x).
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub f: Option<String>,
    /// Imaginary part of the amplitude.
    #[arg(long = "f-imag", value_name = "EXPR", allow_hyphen_values = true)]
    pub f_imag: Option<String>,
    /// Phase g(x).
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub g: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, value_enum, default_value_t = KernelArg::Exp)]
    pub kernel: KernelArg,
    /// Parameter binding, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelArg {
    #[default]
    Exp,
    Cos,
    Sin,
}

impl From<KernelArg> for Kernel {
    fn from(k: KernelArg) -> Kernel {
        match k {
            KernelArg::Exp => Kernel::Exp,
            KernelArg::Cos => Kernel::Cos,
            KernelArg::Sin => Kernel::Sin,
        }
    }
}

pub fn parse_assignment(s: &str) -> Result<(String, f64), CliError> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected NAME=VALUE, got `{s}`")))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value in `{s}`")))?;
    Ok((name.trim().to_string(), v))
}

pub fn parse_params(list: &[String]) -> Result<Params, CliError> {
    let mut out = HashMap::new();
    for s in list {
        let (k, v) = parse_assignment(s)?;
        out.insert(k, v);
    }
    Ok(out)
}

/// Where the integrand comes from.
#[derive(Clone, Debug)]
pub enum Source {
    Paper(IntegralId),
    Custom {
        f: String,
        f_imag: Option<String>,
        g: String,
        a: f64,
        b: f64,
        kernel: Kernel,
    },
}

impl Source {
    pub fn from_args(args: &ProblemArgs) -> Result<Source, CliError> {
        match (&args.paper_integral, &args.f, &args.g) {
            (Some(id), None, None) => {
                if args.f_imag.is_some() || args.a.is_some() || args.b.is_some() {
                    return Err(CliError::Usage(
                        "--paper-integral cannot be combined with --f-imag, --a or --b".into(),
                    ));
                }
                let id: IntegralId = id
                    .parse()
                    .map_err(|e: adaptive_levin::Error| CliError::Usage(e.to_string()))?;
                Ok(Source::Paper(id))
            }
            (None, Some(f), Some(g)) => {
                let (a, b) = match (args.a, args.b) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(CliError::Usage("--a and --b are required with --f/--g".into())),
                };
                Ok(Source::Custom {
                    f: f.clone(),
                    f_imag: args.f_imag.clone(),
                    g: g.clone(),
                    a,
                    b,
                    kernel: args.kernel.into(),
                })
            }
            (Some(_), _, _) => Err(CliError::Usage(
                "--paper-integral cannot be combined with --f/--g".into(),
            )),
            _ => Err(CliError::Usage(
                "give either --paper-integral or both --f and --g".into(),
            )),
        }
    }

    /// Instantiates the problem at concrete parameter values.
    pub fn instantiate(&self, params: &Params) -> Result<Problem, CliError> {
        match self {
            Source::Paper(id) => Ok(Problem::Paper(integrand_for(*id, params)?)),
            Source::Custom {
                f,
                f_imag,
                g,
                a,
                b,
                kernel,
            } => {
                let names: Vec<&str> = params.keys().map(String::as_str).collect();
                let fr = parse_with_params(f, &names)?.bind(params)?;
                let gx = parse_with_params(g, &names)?.bind(params)?;
                let integrand = match f_imag {
                    None => Integrand::real(move |x| fr.eval(x), move |x| gx.eval(x)),
                    Some(fi) => {
                        let fi = parse_with_params(fi, &names)?.bind(params)?;
                        Integrand::new(move |x| Complex64::new(fr.eval(x), fi.eval(x)), move |x| gx.eval(x))
                    }
                };
                Ok(Problem::Custom {
                    integrand: integrand.with_kernel(*kernel),
                    a: *a,
                    b: *b,
                })
            }
        }
    }
}

/// An instantiated problem.
pub enum Problem {
    Paper(ReferenceProblem),
    Custom { integrand: Integrand, a: f64, b: f64 },
}

impl Problem {
    pub fn integrate(&self, config: &AdaptiveConfig) -> Result<QuadResult, CliError> {
        Ok(match self {
            Problem::Paper(p) => p.integrate(config)?,
            Problem::Custom { integrand, a, b } => adaptive_integrate(integrand, *a, *b, config)?,
        })
    }

    pub fn oracle(&self, tol: f64) -> Result<QuadResult, CliError> {
        Ok(match self {
            Problem::Paper(p) => p.oracle(tol)?,
            Problem::Custom { integrand, a, b } => adaptive_gauss(|x| integrand.value(x), *a, *b, tol)?,
        })
    }

    pub fn closed_form(&self) -> Option<Complex64> {
        match self {
            Problem::Paper(p) => p.closed_form(),
            Problem::Custom { .. } => None,
        }
    }
}
