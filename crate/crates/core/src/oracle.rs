//! Adaptive Gauss–Legendre quadrature, the independent reference integrator.
//!
//! Each interval is integrated with an n-point rule (30 by default) and
//! compared against the sum of the rule applied to both halves; the
//! worklist discipline is the same as the Levin driver's.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::adaptive::{bisect, check_interval, Limits, PanelEstimate, QuadResult};
use crate::error::{Error, Result};

/// Points per panel used by the oracle.
pub const DEFAULT_POINTS: usize = 30;
/// Tolerance used by the oracle unless overridden.
pub const DEFAULT_TOL: f64 = 1e-15;
const MAX_POINTS: usize = 200;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Applies the rule to `f` over `[a, b]`.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Complex64
    where
        F: Fn(f64) -> Complex64,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s: Complex64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(mid + half * x) * w)
            .sum();
        s * half
    }
}

/// Legendre `P_n(x)` and `P_{n−1}(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Builds the n-point rule by Newton iteration on `P_n` from Chebyshev-like
/// initial guesses.
pub fn gauss_rule(n: usize) -> Result<GaussRule> {
    if n == 0 || n > MAX_POINTS {
        return Err(Error::InvalidOrder { k: n, min: 1 });
    }
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // roots in the upper half, mirrored below
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(n, x);
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 2.0 * f64::EPSILON {
                let (p, pm1) = legendre_pair(n, x);
                dp = nf * (x * p - pm1) / (x * x - 1.0);
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::GaussNoConvergence { n });
        }
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
            let (p, pm1) = legendre_pair(n, x);
            dp = nf * (x * p - pm1) / (x * x - 1.0);
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(GaussRule { n, nodes, weights })
}

fn default_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_rule(DEFAULT_POINTS).expect("30-point Gauss rule"))
}

/// Limits used by [`adaptive_gauss`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussConfig {
    pub tol: f64,
    pub max_intervals: usize,
    pub min_width_factor: f64,
}

impl Default for GaussConfig {
    fn default() -> Self {
        GaussConfig {
            tol: DEFAULT_TOL,
            max_intervals: 1 << 24,
            min_width_factor: 16.0 * f64::EPSILON,
        }
    }
}

/// Adaptive 30-point Gauss–Legendre quadrature of `∫ₐᵇ f` with absolute tolerance `tol`.
pub fn adaptive_gauss<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    adaptive_gauss_with(
        f,
        a,
        b,
        &GaussConfig {
            tol,
            ..Default::default()
        },
    )
}

pub fn adaptive_gauss_with<F>(f: F, a: f64, b: f64, config: &GaussConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    check_interval(a, b)?;
    if !(config.tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive, got {}",
            config.tol
        )));
    }
    let rule = default_rule();
    let limits = Limits {
        eps: config.tol,
        max_intervals: config.max_intervals,
        min_width_factor: config.min_width_factor,
    };
    Ok(bisect(a, b, limits, |x0, x1| {
        let v = rule.integrate(&f, x0, x1);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(PanelEstimate {
                value: v,
                fevals: rule.n,
                force_split: false,
            })
        } else {
            Err(Error::NonFinite)
        }
    }))
}
