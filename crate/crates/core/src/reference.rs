//! Catalog of benchmark integrals with closed forms where available.
//!
//! | id  | integral                                                       | params          |
//! |-----|----------------------------------------------------------------|-----------------|
//! | I1  | ∫₋₁¹ cos(λ atan x) / (1+x²) dx                                 | lambda          |
//! | I2  | ∫₀^∞ exp(iλx²) / √x dx                                         | lambda          |
//! | I3  | ∫₀¹ exp(iλ/√x) / x dx                                          | lambda          |
//! | I4  | ∫₀¹⁰ exp(iλ eˣ) eˣ dx                                          | lambda          |
//! | I5  | ∫₀¹ exp(iλx²) e⁻ˣ x dx                                         | lambda          |
//! | I6  | ∫₋₁¹ exp(iλx²) (1+x²) dx                                       | lambda          |
//! | I7  | ∫₋₄⁴ exp(iλx²) dx                                              | lambda          |
//! | I8  | ∫₋₁¹ exp(iλx⁴) / (0.01+x⁴) dx                                  | lambda          |
//! | I9  | ∫₋₁¹ exp(iλxᵐ) cos x / (1+x²) dx                               | lambda, m       |
//! | I21 | (1/4π²) ∫₋π^π exp(−iκ s(φ)) / s(φ) · cos(mφ) dφ, s = √(1−α cos φ) | kappa, m, alpha |
//! | I22 | ∫₋₁¹ exp(iλ cos²(πmx/2)) / (1+x²) dx                           | lambda, m       |
//!
//! I2 and I3 are not directly computable over their nominal domains. I2 is
//! truncated at `R = (λτ)^{−2/3}`: integrating by parts twice bounds the tail
//! by `|∫_R^∞| ≤ 1/(λ R^{3/2}) = τ`. I3 is cut at `η = (λτ/4)²`: with `u = x^{−1/2}`
//! the piece over `[0, η]` is `2∫_U^∞ e^{iλu}/u du`, `U = η^{−1/2}`, which one
//! integration by parts bounds by `4/(λU) = τ`. Here `τ` is [`TAIL_TOL`].
//!
//! For I21 the `cos(mφ)` factor is folded into the phase, giving two
//! exp-kernel integrals with phases `±mφ − κ s(φ)` whose average is taken.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::adaptive::{adaptive_integrate, AdaptiveConfig, QuadResult, QuadStatus};
use crate::error::{Error, Result};
use crate::expr;
use crate::levin::{Integrand, Kernel};
use crate::oracle;

/// Γ(5/4), pinned.
pub const GAMMA_5_4: f64 = 0.906_402_477_055_477;

/// Bound on the neglected tail of the truncated I2 and I3 domains.
pub const TAIL_TOL: f64 = 1e-12;

pub type Params = HashMap<String, f64>;

/// Builds a parameter map from `(name, value)` pairs.
pub fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntegralId {
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
    I7,
    I8,
    I9,
    I21,
    I22,
}

impl IntegralId {
    pub const ALL: [IntegralId; 11] = [
        IntegralId::I1,
        IntegralId::I2,
        IntegralId::I3,
        IntegralId::I4,
        IntegralId::I5,
        IntegralId::I6,
        IntegralId::I7,
        IntegralId::I8,
        IntegralId::I9,
        IntegralId::I21,
        IntegralId::I22,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntegralId::I1 => "I1",
            IntegralId::I2 => "I2",
            IntegralId::I3 => "I3",
            IntegralId::I4 => "I4",
            IntegralId::I5 => "I5",
            IntegralId::I6 => "I6",
            IntegralId::I7 => "I7",
            IntegralId::I8 => "I8",
            IntegralId::I9 => "I9",
            IntegralId::I21 => "I21",
            IntegralId::I22 => "I22",
        }
    }
}

impl fmt::Display for IntegralId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntegralId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IntegralId::ALL
            .iter()
            .copied()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownIntegral(s.to_string()))
    }
}

/// How the integration domain is obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainSpec {
    Fixed(f64, f64),
    /// `[0, (λτ)^{−2/3}]`
    TruncatedHalfLine,
    /// `[(λτ/4)², 1]`
    TruncatedSingularStart,
}

/// A catalog entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NamedIntegral {
    pub id: IntegralId,
    pub f_expr: &'static str,
    /// One phase per exp-kernel term; the terms are summed and scaled by `scale`.
    pub g_exprs: &'static [&'static str],
    pub kernel: Kernel,
    pub params: &'static [&'static str],
    pub domain: DomainSpec,
    pub scale: f64,
    pub has_closed_form: bool,
}

const LAMBDA: &[&str] = &["lambda"];
const LAMBDA_M: &[&str] = &["lambda", "m"];

const CATALOG: [NamedIntegral; 11] = [
    NamedIntegral {
        id: IntegralId::I1,
        f_expr: "1/(1+x^2)",
        g_exprs: &["lambda*atan(x)"],
        kernel: Kernel::Cos,
        params: LAMBDA,
        domain: DomainSpec::Fixed(-1.0, 1.0),
        scale: 1.0,
        has_closed_form: true,
    },
    NamedIntegral {
        id: IntegralId::I2,
        f_expr: "1/sqrt(x)",
        g_exprs: &["lambda*x^2"],
        kernel: Kernel::Exp,
        params: LAMBDA,
        domain: DomainSpec::TruncatedHalfLine,
        scale: 1.0,
        has_closed_form: true,
    },
    NamedIntegral {
        id: IntegralId::I3,
        f_expr: "1/x",
        g_exprs: &["lambda/sqrt(x)"],
        kernel: Kernel::Exp,
        params: LAMBDA,
        domain: DomainSpec::TruncatedSingularStart,
        scale: 1.0,
        has_closed_form: false,
    },
    NamedIntegral {
        id: IntegralId::I4,
        f_expr: "exp(x)",
        g_exprs: &["lambda*exp(x)"],
        kernel: Kernel::Exp,
        params: LAMBDA,
        domain: DomainSpec::Fixed(0.0, 10.0),
        scale: 1.0,
        has_closed_form: true,
    },
    NamedIntegral {
        id: IntegralId::I5,
        f_expr: "exp(-x)*x",
        g_exprs: &["lambda*x^2"],
        kernel: Kernel::Exp,
        params: LAMBDA,
        domain: DomainSpec::Fixed(0.0, 1.0),
        scale: 1.0,
        has_closed_form: false,
    },
    NamedIntegral {
        id: IntegralId::I6,
        f_expr: "1+x^2",
        g_exprs: &["lambda*x^2"],
        kernel: Kernel::Exp,
        params: LAMBDA,
        domain: DomainSpec::Fixed(-1.0, 1.0),
        scale: 1.0,
        has_closed_form: false,
    },
    NamedIntegral {
        id: IntegralId::I7,
        f_expr: "1",
        g_exprs: &["lambda*x^2"],
        kernel: Kernel::Exp,
        params: LAMBDA,
        domain: DomainSpec::Fixed(-4.0, 4.0),
        scale: 1.0,
        has_closed_form: false,
    },
    NamedIntegral {
        id: IntegralId::I8,
        f_expr: "1/(0.01+x^4)",
        g_exprs: &["lambda*x^4"],
        kernel: Kernel::Exp,
        params: LAMBDA,
        domain: DomainSpec::Fixed(-1.0, 1.0),
        scale: 1.0,
        has_closed_form: false,
    },
    NamedIntegral {
        id: IntegralId::I9,
        f_expr: "cos(x)/(1+x^2)",
        g_exprs: &["lambda*x^m"],
        kernel: Kernel::Exp,
        params: LAMBDA_M,
        domain: DomainSpec::Fixed(-1.0, 1.0),
        scale: 1.0,
        has_closed_form: false,
    },
    NamedIntegral {
        id: IntegralId::I21,
        f_expr: "1/sqrt(1-alpha*cos(x))",
        g_exprs: &["m*x - kappa*sqrt(1-alpha*cos(x))", "-m*x - kappa*sqrt(1-alpha*cos(x))"],
        kernel: Kernel::Exp,
        params: &["kappa", "m", "alpha"],
        domain: DomainSpec::Fixed(-PI, PI),
        scale: 1.0 / (8.0 * PI * PI),
        has_closed_form: false,
    },
    NamedIntegral {
        id: IntegralId::I22,
        f_expr: "1/(1+x^2)",
        g_exprs: &["lambda*cos(pi/2*m*x)^2"],
        kernel: Kernel::Exp,
        params: LAMBDA_M,
        domain: DomainSpec::Fixed(-1.0, 1.0),
        scale: 1.0,
        has_closed_form: false,
    },
];

/// Looks up a catalog entry.
pub fn named(id: IntegralId) -> &'static NamedIntegral {
    CATALOG
        .iter()
        .find(|e| e.id == id)
        .expect("catalog covers every IntegralId")
}

fn param(id: IntegralId, params: &Params, name: &str) -> Result<f64> {
    params.get(name).copied().ok_or_else(|| Error::MissingParameter {
        id: id.to_string(),
        param: name.to_string(),
    })
}

fn positive_lambda(id: IntegralId, params: &Params) -> Result<f64> {
    let lambda = param(id, params, "lambda")?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("{id} needs lambda > 0, got {lambda}")));
    }
    Ok(lambda)
}

/// Closed-form value for I1, I2 and I4.
pub fn closed_form_value(id: IntegralId, params: &Params) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    match id {
        IntegralId::I1 => {
            let lambda = param(id, params, "lambda")?;
            Ok(Complex64::new(2.0 / lambda * (PI * lambda / 4.0).sin(), 0.0))
        }
        IntegralId::I2 => {
            let lambda = positive_lambda(id, params)?;
            Ok(Complex64::cis(PI / 8.0) * (2.0 * GAMMA_5_4 / lambda.powf(0.25)))
        }
        IntegralId::I4 => {
            let lambda = param(id, params, "lambda")?;
            Ok(i / lambda * (Complex64::cis(lambda) - Complex64::cis(10f64.exp() * lambda)))
        }
        other => Err(Error::NoClosedForm(other.to_string())),
    }
}

/// One exp- or cos-kernel piece of a reference problem.
#[derive(Clone, Debug)]
pub struct Term {
    pub integrand: Integrand,
    pub weight: f64,
}

/// A catalog integral instantiated at concrete parameters.
#[derive(Clone, Debug)]
pub struct ReferenceProblem {
    pub id: IntegralId,
    pub a: f64,
    pub b: f64,
    pub terms: Vec<Term>,
    pub params: Params,
}

/// Instantiates the catalog entry `id` at `params`.
pub fn integrand_for(id: IntegralId, params: &Params) -> Result<ReferenceProblem> {
    let entry = named(id);
    for p in entry.params {
        param(id, params, p)?;
    }
    let (a, b) = match entry.domain {
        DomainSpec::Fixed(a, b) => (a, b),
        DomainSpec::TruncatedHalfLine => {
            let lambda = positive_lambda(id, params)?;
            (0.0, (lambda * TAIL_TOL).powf(-2.0 / 3.0))
        }
        DomainSpec::TruncatedSingularStart => {
            let lambda = positive_lambda(id, params)?;
            let eta = (lambda * TAIL_TOL / 4.0).powi(2);
            if eta >= 1.0 {
                return Err(Error::InvalidConfig(format!("{id}: lambda {lambda} too large")));
            }
            (eta, 1.0)
        }
    };
    let f = expr::parse_with_params(entry.f_expr, entry.params)?.bind(params)?;
    let terms = entry
        .g_exprs
        .iter()
        .map(|src| {
            let g = expr::parse_with_params(src, entry.params)?.bind(params)?;
            let f = f.clone();
            Ok(Term {
                integrand: Integrand::real(move |x| f.eval(x), move |x| g.eval(x)).with_kernel(entry.kernel),
                weight: entry.scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReferenceProblem {
        id,
        a,
        b,
        terms,
        params: params.clone(),
    })
}

fn worse(a: QuadStatus, b: QuadStatus) -> QuadStatus {
    let rank = |s: QuadStatus| match s {
        QuadStatus::Converged => 0,
        QuadStatus::WidthFloor => 1,
        QuadStatus::BudgetExhausted => 2,
        QuadStatus::PanelFailure => 3,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn combine(results: &[(QuadResult, f64)]) -> QuadResult {
    let mut out = QuadResult {
        value: Complex64::new(0.0, 0.0),
        intervals_used: 0,
        panels: 0,
        fevals: 0,
        status: QuadStatus::Converged,
    };
    for (r, w) in results {
        out.value += r.value * *w;
        out.intervals_used += r.intervals_used;
        out.panels += r.panels;
        out.fevals += r.fevals;
        out.status = worse(out.status, r.status);
    }
    out
}

impl ReferenceProblem {
    /// Sum of the weighted term integrands at `x`.
    pub fn integrand_value(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|t| t.integrand.value(x) * t.weight).sum()
    }

    /// Adaptive Levin value. For multi-term problems the tolerance applies to
    /// each term separately.
    pub fn integrate(&self, config: &AdaptiveConfig) -> Result<QuadResult> {
        let results = self
            .terms
            .iter()
            .map(|t| adaptive_integrate(&t.integrand, self.a, self.b, config).map(|r| (r, t.weight)))
            .collect::<Result<Vec<_>>>()?;
        Ok(combine(&results))
    }

    pub fn closed_form(&self) -> Option<Complex64> {
        closed_form_value(self.id, &self.params).ok()
    }

    /// Independent reference value by adaptive Gauss–Legendre quadrature.
    ///
    /// I3 is evaluated along the rotated contour
    /// `2i e^{iλ} ∫₀^∞ e^{−λt} / (1 + it) dt`, which is smooth and decays
    /// exponentially. I2 has no oracle (its truncated domain is far too
    /// oscillatory for Gauss panels); use the closed form.
    pub fn oracle(&self, tol: f64) -> Result<QuadResult> {
        match self.id {
            IntegralId::I2 => Err(Error::InvalidConfig("I2 has no oracle; use the closed form".into())),
            IntegralId::I3 => {
                let lambda = positive_lambda(self.id, &self.params)?;
                let t_max = 45.0 / lambda;
                let i = Complex64::new(0.0, 1.0);
                let mut r = oracle::adaptive_gauss(
                    move |t| Complex64::new((-lambda * t).exp(), 0.0) / Complex64::new(1.0, t),
                    0.0,
                    t_max,
                    tol,
                )?;
                r.value *= 2.0 * i * Complex64::cis(lambda);
                Ok(r)
            }
            _ => {
                let results = self
                    .terms
                    .iter()
                    .map(|t| {
                        let it = &t.integrand;
                        oracle::adaptive_gauss(|x| it.value(x), self.a, self.b, tol).map(|r| (r, t.weight))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(combine(&results))
            }
        }
    }
}
