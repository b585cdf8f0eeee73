//! Single-panel Levin estimate.
//!
//! On a panel `[a₀, b₀]` the Levin equation `p' + i g' p = f` is collocated
//! at the k extremal Chebyshev nodes. With `D` the mapped differentiation
//! matrix, `g'` is taken spectrally from the sampled phase, the system
//! `(D + i diag(g')) p = f` is solved with a truncated factorization, and the
//! panel integral is the antiderivative difference
//! `p(b₀) e^{i g(b₀)} − p(a₀) e^{i g(a₀)}`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::chebyshev::ChebGrid;
use crate::error::{Error, Result};
use crate::linalg::{svd, CMatrix, PivotedQr};

/// Which oscillator multiplies `f`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `exp(i g(x))`
    #[default]
    Exp,
    /// `cos(g(x))`
    Cos,
    /// `sin(g(x))`
    Sin,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Exp => "exp",
            Kernel::Cos => "cos",
            Kernel::Sin => "sin",
        }
    }

    /// Applies the kernel to `f(x)` given the phase value.
    pub fn weight(self, f: Complex64, g: f64) -> Complex64 {
        match self {
            Kernel::Exp => f * Complex64::cis(g),
            Kernel::Cos => f * g.cos(),
            Kernel::Sin => f * g.sin(),
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(Kernel::Exp),
            "cos" => Ok(Kernel::Cos),
            "sin" => Ok(Kernel::Sin),
            other => Err(Error::InvalidConfig(format!("unknown kernel `{other}`"))),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type AmplitudeFn = dyn Fn(f64) -> Complex64 + Send + Sync;
type PhaseFn = dyn Fn(f64) -> f64 + Send + Sync;

/// The integrand `f(x) · kernel(g(x))`.
///
/// `f` and `g` must be re-entrant; panels may be evaluated from several
/// threads when distinct integrals run concurrently.
#[derive(Clone)]
pub struct Integrand {
    f: Arc<AmplitudeFn>,
    g: Arc<PhaseFn>,
    kernel: Kernel,
    real_amplitude: bool,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("kernel", &self.kernel)
            .field("real_amplitude", &self.real_amplitude)
            .finish_non_exhaustive()
    }
}

impl Integrand {
    /// Complex amplitude `f`, real phase `g`.
    pub fn new<F, G>(f: F, g: G) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Integrand {
            f: Arc::new(f),
            g: Arc::new(g),
            kernel: Kernel::Exp,
            real_amplitude: false,
        }
    }

    /// Real amplitude `f`. Cos/sin kernels then reduce to the real and
    /// imaginary parts of a single exp-kernel solve.
    pub fn real<F, G>(f: F, g: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Integrand {
            f: Arc::new(move |x| Complex64::new(f(x), 0.0)),
            g: Arc::new(g),
            kernel: Kernel::Exp,
            real_amplitude: true,
        }
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn has_real_amplitude(&self) -> bool {
        self.real_amplitude
    }

    #[inline]
    pub fn f(&self, x: f64) -> Complex64 {
        (self.f)(x)
    }

    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    /// `f(x) · kernel(g(x))`, the plain integrand value.
    pub fn value(&self, x: f64) -> Complex64 {
        self.kernel.weight(self.f(x), self.g(x))
    }

    /// The integrand `(conj f, −g)`, whose exp-kernel integral is the
    /// conjugate of this one's.
    pub fn conjugate(&self) -> Integrand {
        let f = self.f.clone();
        let g = self.g.clone();
        Integrand {
            f: Arc::new(move |x| f(x).conj()),
            g: Arc::new(move |x| -g(x)),
            kernel: self.kernel,
            real_amplitude: self.real_amplitude,
        }
    }
}

/// Linear solver used on each panel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Solver {
    /// Truncated singular value decomposition.
    Svd,
    /// Column-pivoted (rank-revealing) QR.
    #[default]
    Qr,
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(Solver::Svd),
            "qr" => Ok(Solver::Qr),
            other => Err(Error::InvalidConfig(format!("unknown solver `{other}`"))),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Svd => "svd",
            Solver::Qr => "qr",
        })
    }
}

/// How the truncation level of the panel solve is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdPolicy {
    /// `factor · ‖A‖`: σ₁ on the SVD path, `|r₁₁|` on the QR path.
    Relative(f64),
    /// A fixed truncation level.
    Absolute(f64),
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Relative(f64::EPSILON)
    }
}

impl ThresholdPolicy {
    fn resolve(self, scale: f64) -> f64 {
        let t = match self {
            ThresholdPolicy::Relative(factor) => factor * scale,
            ThresholdPolicy::Absolute(t) => t,
        };
        // a zero matrix gives a zero relative threshold; keep it positive so
        // that the "no singular value survives" branch is taken
        if t > 0.0 {
            t
        } else {
            f64::MIN_POSITIVE
        }
    }
}

/// Per-panel options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PanelOptions {
    pub solver: Solver,
    pub threshold: ThresholdPolicy,
    /// Re-evaluate at a slightly moved node when a sample is not finite.
    pub nudge: bool,
}

impl Default for PanelOptions {
    fn default() -> Self {
        PanelOptions {
            solver: Solver::Qr,
            threshold: ThresholdPolicy::default(),
            nudge: true,
        }
    }
}

/// Endpoint data of an exp-kernel panel solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PanelEndpoints {
    pub p_a: Complex64,
    pub p_b: Complex64,
    pub g_a: f64,
    pub g_b: f64,
}

impl PanelEndpoints {
    /// `p(b) e^{i g(b)} − p(a) e^{i g(a)}`.
    pub fn exp_value(&self) -> Complex64 {
        self.p_b * Complex64::cis(self.g_b) - self.p_a * Complex64::cis(self.g_a)
    }
}

/// Result of one panel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevinLocalResult {
    pub value: Complex64,
    pub rank_used: usize,
    pub p_endpoints: (Complex64, Complex64),
    /// σ₁ on the SVD path, `|r₁₁|` on the QR path.
    pub norm_a: f64,
    /// Number of `(f, g)` evaluations, nudges included.
    pub fevals: usize,
    /// `max g − min g` over the collocation nodes.
    pub phase_span: f64,
    /// The sampled `g'` changes sign (or vanishes) between two nodes.
    pub stationary: bool,
}

impl LevinLocalResult {
    /// True when the panel straddles a stationary point of `g` across which
    /// the phase moves by more than `limit` radians. Such a panel cannot
    /// represent the stationary contribution, and its estimate agrees with
    /// the sum of its halves regardless.
    pub fn unresolved_stationary(&self, limit: f64) -> bool {
        self.stationary && self.phase_span > limit
    }
}

/// Assembles the kernel-weighted panel value.
///
/// `minus` is the solve for `(f, −g)`; pass `None` when `f` is real, in
/// which case cos/sin reduce to the real/imaginary part of `plus`.
pub fn weighted_value(plus: &PanelEndpoints, minus: Option<&PanelEndpoints>, kernel: Kernel) -> Complex64 {
    let ep = plus.exp_value();
    match (kernel, minus) {
        (Kernel::Exp, _) => ep,
        (Kernel::Cos, None) => Complex64::new(ep.re, 0.0),
        (Kernel::Sin, None) => Complex64::new(ep.im, 0.0),
        (Kernel::Cos, Some(m)) => (ep + m.exp_value()) * 0.5,
        (Kernel::Sin, Some(m)) => (ep - m.exp_value()) / Complex64::new(0.0, 2.0),
    }
}

struct Samples {
    f: Vec<Complex64>,
    g: Vec<f64>,
    fevals: usize,
}

fn sample(integrand: &Integrand, nodes: &[f64], a0: f64, b0: f64, nudge: bool) -> Result<Samples> {
    let k = nodes.len();
    let mid = 0.5 * (a0 + b0);
    let delta = (b0 - a0) * 2f64.powi(-46);
    let mut f = Vec::with_capacity(k);
    let mut g = Vec::with_capacity(k);
    let mut fevals = 0;
    for &x in nodes {
        let mut fx = integrand.f(x);
        let mut gx = integrand.g(x);
        fevals += 1;
        let finite = |fx: Complex64, gx: f64| fx.re.is_finite() && fx.im.is_finite() && gx.is_finite();
        if !finite(fx, gx) {
            if !nudge {
                return Err(Error::NonFiniteSample { x });
            }
            let moved = if x < mid { x + delta } else { x - delta };
            fx = integrand.f(moved);
            gx = integrand.g(moved);
            fevals += 1;
            if !finite(fx, gx) {
                return Err(Error::NonFiniteSample { x: moved });
            }
        }
        f.push(fx);
        g.push(gx);
    }
    Ok(Samples { f, g, fevals })
}

/// Solves the collocated Levin system for sampled `f`, `g` on `[a0, b0]`.
fn solve_panel(
    grid: &ChebGrid,
    a0: f64,
    b0: f64,
    f: &[Complex64],
    g: &[f64],
    opts: &PanelOptions,
) -> Result<(PanelEndpoints, usize, f64, bool)> {
    let k = grid.k();
    let scale = 2.0 / (b0 - a0);
    let dg = grid.differentiate(g)?;
    let stationary = dg.windows(2).any(|w| w[0] * w[1] <= 0.0);
    let a = CMatrix::from_fn(k, k, |i, j| {
        let d = grid.diff_entry(i, j) * scale;
        if i == j {
            Complex64::new(d, dg[i] * scale)
        } else {
            Complex64::new(d, 0.0)
        }
    });
    let (p, rank, norm) = match opts.solver {
        Solver::Svd => {
            let fac = svd(&a)?;
            let norm = fac.sigma[0];
            let (p, rep) = fac.solve_truncated(f, opts.threshold.resolve(norm));
            (p, rep.rank_used, norm)
        }
        Solver::Qr => {
            let qr = PivotedQr::factor(&a)?;
            let norm = qr.r_diag_abs()[0];
            let (p, rep) = qr.solve_truncated(f, opts.threshold.resolve(norm));
            (p, rep.rank_used, norm)
        }
    };
    let ends = PanelEndpoints {
        p_a: p[0],
        p_b: p[k - 1],
        g_a: g[0],
        g_b: g[k - 1],
    };
    Ok((ends, rank, norm, stationary))
}

fn phase_span(g: &[f64]) -> f64 {
    let (lo, hi) = g.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    hi - lo
}

/// Levin estimate of `∫_{a0}^{b0} f(x) kernel(g(x)) dx` from one k-point collocation solve.
pub fn levin_panel(
    integrand: &Integrand,
    a0: f64,
    b0: f64,
    grid: &ChebGrid,
    opts: &PanelOptions,
) -> Result<LevinLocalResult> {
    if !(a0.is_finite() && b0.is_finite()) || a0 >= b0 {
        return Err(Error::InvalidInterval { a: a0, b: b0 });
    }
    let mapped = grid.map_to_interval(a0, b0)?;
    let s = sample(integrand, &mapped.nodes, a0, b0, opts.nudge)?;

    if s.f.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Ok(LevinLocalResult {
            value: Complex64::new(0.0, 0.0),
            rank_used: 0,
            p_endpoints: (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            norm_a: 0.0,
            fevals: s.fevals,
            phase_span: 0.0,
            stationary: false,
        });
    }

    let (plus, rank, norm, stationary) = solve_panel(grid, a0, b0, &s.f, &s.g, opts)?;
    let needs_minus = integrand.kernel() != Kernel::Exp && !integrand.has_real_amplitude();
    let value = if needs_minus {
        let neg_g: Vec<f64> = s.g.iter().map(|v| -v).collect();
        let (minus, ..) = solve_panel(grid, a0, b0, &s.f, &neg_g, opts)?;
        weighted_value(&plus, Some(&minus), integrand.kernel())
    } else {
        weighted_value(&plus, None, integrand.kernel())
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(LevinLocalResult {
        value,
        rank_used: rank,
        p_endpoints: (plus.p_a, plus.p_b),
        norm_a: norm,
        fevals: s.fevals,
        phase_span: phase_span(&s.g),
        stationary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::grid;

    fn both_solvers() -> [PanelOptions; 2] {
        [
            PanelOptions {
                solver: Solver::Qr,
                ..Default::default()
            },
            PanelOptions {
                solver: Solver::Svd,
                ..Default::default()
            },
        ]
    }

    #[test]
    fn constant_amplitude_zero_phase() {
        let g12 = grid(12).unwrap();
        for opts in both_solvers() {
            let it = Integrand::real(|_| 1.0, |_| 0.0);
            let r = levin_panel(&it, -1.0, 1.0, &g12, &opts).unwrap();
            assert!((r.value - Complex64::new(2.0, 0.0)).norm() <= 1e-12, "{opts:?} {r:?}");
            assert!(r.rank_used < 12);
        }
    }

    #[test]
    fn linear_phase_closed_form() {
        let g12 = grid(12).unwrap();
        let lambda = 100.0;
        let want = 2.0 * f64::sin(lambda) / lambda;
        for opts in both_solvers() {
            let it = Integrand::real(|_| 1.0, move |x| lambda * x);
            let r = levin_panel(&it, -1.0, 1.0, &g12, &opts).unwrap();
            assert!((r.value.re - want).abs() <= 1e-12 && r.value.im.abs() <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn cos_and_sin_kernels() {
        let g12 = grid(12).unwrap();
        let lambda = 50.0;
        let want = 2.0 * f64::sin(lambda) / lambda;
        let base = Integrand::real(|_| 1.0, move |x| lambda * x);
        let opts = PanelOptions::default();
        let e = levin_panel(&base, -1.0, 1.0, &g12, &opts).unwrap().value;
        let c = levin_panel(&base.clone().with_kernel(Kernel::Cos), -1.0, 1.0, &g12, &opts)
            .unwrap()
            .value;
        let s = levin_panel(&base.clone().with_kernel(Kernel::Sin), -1.0, 1.0, &g12, &opts)
            .unwrap()
            .value;
        assert_eq!(c, Complex64::new(e.re, 0.0));
        assert_eq!(s, Complex64::new(e.im, 0.0));
        assert!((c.re - want).abs() < 1e-12);

        // complex amplitude takes the two-solve route and must agree
        let cplx = Integrand::new(|_| Complex64::new(1.0, 0.0), move |x| lambda * x).with_kernel(Kernel::Cos);
        let c2 = levin_panel(&cplx, -1.0, 1.0, &g12, &opts).unwrap().value;
        assert!((c2 - c).norm() < 1e-12);
        let sin2 = levin_panel(&cplx.with_kernel(Kernel::Sin), -1.0, 1.0, &g12, &opts)
            .unwrap()
            .value;
        assert!((sin2 - s).norm() < 1e-12);
    }

    #[test]
    fn weighted_value_from_endpoints() {
        let ends = PanelEndpoints {
            p_a: Complex64::new(0.5, -0.25),
            p_b: Complex64::new(1.0, 2.0),
            g_a: 0.3,
            g_b: -1.2,
        };
        let e = ends.exp_value();
        assert_eq!(weighted_value(&ends, None, Kernel::Exp), e);
        assert_eq!(weighted_value(&ends, None, Kernel::Cos), Complex64::new(e.re, 0.0));
        assert_eq!(weighted_value(&ends, None, Kernel::Sin), Complex64::new(e.im, 0.0));
    }

    #[test]
    fn zero_amplitude_is_exactly_zero() {
        let g12 = grid(12).unwrap();
        let it = Integrand::real(|_| 0.0, |x| 1e6 * x.sin());
        let r = levin_panel(&it, 0.0, 3.0, &g12, &PanelOptions::default()).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn nudge_handles_endpoint_singularity() {
        let g12 = grid(12).unwrap();
        let it = Integrand::real(|x: f64| 1.0 / x.sqrt(), |x| x * x);
        let r = levin_panel(&it, 0.0, 1.0, &g12, &PanelOptions::default()).unwrap();
        assert!(r.value.re.is_finite());
        assert_eq!(r.fevals, 13);
        let strict = PanelOptions {
            nudge: false,
            ..Default::default()
        };
        assert!(matches!(
            levin_panel(&it, 0.0, 1.0, &g12, &strict),
            Err(Error::NonFiniteSample { .. })
        ));
    }

    #[test]
    fn rejects_bad_interval() {
        let g12 = grid(12).unwrap();
        let it = Integrand::real(|_| 1.0, |_| 0.0);
        assert!(levin_panel(&it, 1.0, 1.0, &g12, &PanelOptions::default()).is_err());
        assert!(levin_panel(&it, 0.0, f64::INFINITY, &g12, &PanelOptions::default()).is_err());
    }

    #[test]
    fn kernel_and_solver_parse() {
        assert_eq!("cos".parse::<Kernel>().unwrap(), Kernel::Cos);
        assert_eq!("svd".parse::<Solver>().unwrap(), Solver::Svd);
        assert!("tan".parse::<Kernel>().is_err());
        assert!("lu".parse::<Solver>().is_err());
    }
}
