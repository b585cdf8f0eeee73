//! Invariant suite exercised by `levin selftest` and by the test suites.
//!
//! Every check is deterministic (seeded RNG) and the whole suite runs in a
//! few seconds in release builds.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adaptive::{adaptive_integrate, AdaptiveConfig, QuadStatus};
use crate::chebyshev::{self, cheb_coeffs, cheb_eval, ChebGrid};
use crate::levin::{levin_panel, Integrand, PanelOptions, Solver};
use crate::linalg::{self, svd, tsvd_solve, CMatrix};
use crate::oracle::{adaptive_gauss, gauss_rule};
use crate::reference::{integrand_for, params, IntegralId};

/// Spectral norm of the 12-point differentiation matrix, pinned.
pub const DIFF12_NORM: f64 = 68.134_460_737_867_31;

/// Faults that can be injected to check that the suite detects them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Perturbs one off-diagonal entry of every differentiation matrix.
    DiffMatrix,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "diff-matrix" => Ok(Fault::DiffMatrix),
            other => Err(format!("unknown fault `{other}`")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SelfTestOptions {
    /// Only run checks whose module name equals this.
    pub filter: Option<String>,
    pub fault: Option<Fault>,
}

/// Shared state handed to every check.
pub struct Context {
    fault: Option<Fault>,
}

impl Context {
    pub fn new(fault: Option<Fault>) -> Self {
        Context { fault }
    }

    /// The differentiation grid of order `k`, corrupted if a fault is injected.
    pub fn grid(&self, k: usize) -> ChebGrid {
        let g = ChebGrid::new(k).expect("valid order");
        match self.fault {
            Some(Fault::DiffMatrix) => {
                let mut d = g.diff().to_vec();
                d[1] += 1e-3;
                ChebGrid::from_parts(g.nodes().to_vec(), d).expect("same shape")
            }
            None => g,
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0x5eed_0000 + salt)
    }
}

type CheckResult = Result<String, String>;

/// A named invariant check.
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    run: fn(&Context) -> CheckResult,
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// All registered checks, in execution order.
pub fn checks() -> Vec<Check> {
    vec![
        Check {
            module: "chebyshev",
            name: "polynomial exactness",
            run: cheb_polynomial_exactness,
        },
        Check {
            module: "chebyshev",
            name: "differentiation exactness",
            run: cheb_diff_exactness,
        },
        Check {
            module: "chebyshev",
            name: "aliasing identity",
            run: cheb_aliasing,
        },
        Check {
            module: "chebyshev",
            name: "differentiation norm",
            run: cheb_diff_norm,
        },
        Check {
            module: "linalg",
            name: "svd factor invariants",
            run: svd_invariants,
        },
        Check {
            module: "linalg",
            name: "tsvd planted-system bounds",
            run: tsvd_planted,
        },
        Check {
            module: "linalg",
            name: "svd vs qr on I6 sweep",
            run: solver_agreement_i6,
        },
        Check {
            module: "oracle",
            name: "gauss rule invariants",
            run: gauss_invariants,
        },
        Check {
            module: "levin",
            name: "conjugation",
            run: levin_conjugation,
        },
        Check {
            module: "levin",
            name: "affine invariance",
            run: levin_affine,
        },
        Check {
            module: "levin",
            name: "zero forcing",
            run: levin_zero,
        },
        Check {
            module: "levin",
            name: "low-frequency continuity",
            run: levin_low_frequency,
        },
        Check {
            module: "levin",
            name: "stationary point panel",
            run: levin_stationary,
        },
        Check {
            module: "adaptive",
            name: "additivity",
            run: adaptive_additivity,
        },
        Check {
            module: "adaptive",
            name: "determinism",
            run: adaptive_determinism,
        },
    ]
}

/// Runs the (filtered) suite.
pub fn run(opts: &SelfTestOptions) -> Vec<CheckOutcome> {
    let ctx = Context::new(opts.fault);
    checks()
        .into_iter()
        .filter(|c| opts.filter.as_deref().is_none_or(|f| f == c.module))
        .map(|c| {
            let t = Instant::now();
            let r = std::panic::catch_unwind(|| (c.run)(&ctx)).unwrap_or_else(|_| Err("panicked".into()));
            let seconds = t.elapsed().as_secs_f64();
            let (passed, detail) = match r {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome {
                module: c.module,
                name: c.name,
                passed,
                detail,
                seconds,
            }
        })
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn cheb_polynomial_exactness(ctx: &Context) -> CheckResult {
    let mut rng = ctx.rng(1);
    let mut worst: f64 = 0.0;
    for k in [4usize, 8, 12, 16] {
        let grid = ctx.grid(k);
        for _ in 0..10 {
            let deg = rng.gen_range(0..k);
            let poly: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let samples: Vec<Complex64> = grid
                .nodes()
                .iter()
                .map(|&x| Complex64::new(horner(&poly, x), 0.0))
                .collect();
            let coeffs = cheb_coeffs(&samples).map_err(|e| e.to_string())?;
            let scale = poly.iter().map(|c| c.abs()).sum::<f64>();
            for _ in 0..100 {
                let x = rng.gen_range(-1.0..=1.0);
                let err = (cheb_eval(&coeffs, x).re - horner(&poly, x)).abs() / scale;
                worst = worst.max(err);
            }
        }
    }
    ensure(worst <= 1e-12, || format!("interpolation error {worst:e}"))?;
    Ok(format!("max rel error {worst:.2e}"))
}

fn cheb_diff_exactness(ctx: &Context) -> CheckResult {
    let mut worst: f64 = 0.0;
    for k in [4usize, 8, 12, 16] {
        let grid = ctx.grid(k);
        let ones = vec![1.0; k];
        let d1 = grid.differentiate(&ones).map_err(|e| e.to_string())?;
        let rs = d1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ensure(rs <= 1e-13, || format!("k={k}: derivative of constant {rs:e}"))?;
        for m in 1..k {
            let v: Vec<f64> = grid.nodes().iter().map(|x| x.powi(m as i32)).collect();
            let got = grid.differentiate(&v).map_err(|e| e.to_string())?;
            for (x, g) in grid.nodes().iter().zip(&got) {
                let want = m as f64 * x.powi(m as i32 - 1);
                worst = worst.max((g - want).abs() / m as f64);
            }
        }
    }
    ensure(worst <= 1e-11, || format!("monomial derivative error {worst:e}"))?;
    Ok(format!("max rel error {worst:.2e}"))
}

fn cheb_aliasing(ctx: &Context) -> CheckResult {
    let k = 12;
    let grid = ctx.grid(k);
    let period = 2 * (k - 1);
    let mut worst: f64 = 0.0;
    for n in 0..k {
        for shift in [period, 2 * period] {
            let deg = (n + shift) as f64;
            let v: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| (deg * x.clamp(-1.0, 1.0).acos()).cos())
                .collect();
            let a = cheb_coeffs(&v).map_err(|e| e.to_string())?;
            for (j, c) in a.iter().enumerate() {
                let want = if j == n { 1.0 } else { 0.0 };
                worst = worst.max((c - want).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("aliasing defect {worst:e}"))?;
    Ok(format!("max defect {worst:.2e}"))
}

fn cheb_diff_norm(ctx: &Context) -> CheckResult {
    let grid = ctx.grid(12);
    let a = CMatrix::from_real(12, 12, grid.diff()).map_err(|e| e.to_string())?;
    let s = svd(&a).map_err(|e| e.to_string())?.sigma[0];
    ensure((50.0..=500.0).contains(&s), || format!("norm {s} outside [50, 500]"))?;
    ensure((s - DIFF12_NORM).abs() <= 1e-10 * DIFF12_NORM, || {
        format!("norm {s} != pinned {DIFF12_NORM}")
    })?;
    Ok(format!("‖D₁₂‖₂ = {s:.6}"))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Orthonormalizes the columns of a random matrix (modified Gram–Schmidt, twice).
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let m = random_matrix(rng, n);
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| m.column(j)).collect();
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let d: Complex64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let ci = cols[i].clone();
                for (x, y) in cols[j].iter_mut().zip(ci) {
                    *x -= d * y;
                }
            }
        }
        let nrm = linalg::vec_norm(&cols[j]);
        cols[j].iter_mut().for_each(|z| *z /= nrm);
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `U diag(s) V*` for random unitaries.
pub fn planted_matrix(rng: &mut ChaCha8Rng, s: &[f64]) -> CMatrix {
    let n = s.len();
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let us = CMatrix::from_fn(n, n, |i, j| u[(i, j)] * s[j]);
    us.mul(&v.adjoint())
}

fn svd_invariants(ctx: &Context) -> CheckResult {
    let mut rng = ctx.rng(2);
    let n = 12;
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let a = if trial % 2 == 0 {
            random_matrix(&mut rng, n)
        } else {
            let s: Vec<f64> = (0..n).map(|i| 10f64.powf(-(i as f64) * 1.5)).collect();
            planted_matrix(&mut rng, &s)
        };
        let f = svd(&a).map_err(|e| e.to_string())?;
        let us = CMatrix::from_fn(n, n, |i, j| f.u[(i, j)] * f.sigma[j]);
        let rec = us.mul(&f.v.adjoint()).sub(&a).frobenius_norm() / a.frobenius_norm();
        let du = f.u.adjoint().mul(&f.u).sub(&CMatrix::identity(n)).frobenius_norm();
        let dv = f.v.adjoint().mul(&f.v).sub(&CMatrix::identity(n)).frobenius_norm();
        ensure(f.sigma.windows(2).all(|w| w[0] >= w[1]), || {
            "singular values not sorted".into()
        })?;
        worst = worst.max(rec).max(du).max(dv);
    }
    ensure(worst <= 1e-12, || format!("factor defect {worst:e}"))?;
    Ok(format!("max defect {worst:.2e}"))
}

fn tsvd_planted(ctx: &Context) -> CheckResult {
    let mut rng = ctx.rng(3);
    let n = 12;
    let eps = f64::EPSILON;
    let (mut worst_norm, mut worst_res): (f64, f64) = (0.0, 0.0);
    for trial in 0..40 {
        let decay = 1.0 + trial as f64 * 0.75;
        let s: Vec<f64> = (0..n).map(|i| 10f64.powf(-(i as f64) * decay)).collect();
        let a = planted_matrix(&mut rng, &s);
        let xbar: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let na = s[0];
        let nx = linalg::vec_norm(&xbar);
        let noise: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let nn = linalg::vec_norm(&noise);
        let y: Vec<Complex64> = a
            .mul_vec(&xbar)
            .iter()
            .zip(&noise)
            .map(|(ax, e)| ax + e * (eps * na * nx / nn))
            .collect();
        let (z, _) = tsvd_solve(&a, &y, eps * na).map_err(|e| e.to_string())?;
        let r: Vec<Complex64> = a.mul_vec(&z).iter().zip(&y).map(|(p, q)| p - q).collect();
        worst_norm = worst_norm.max(linalg::vec_norm(&z) / nx);
        worst_res = worst_res.max(linalg::vec_norm(&r) / (eps * na * nx));
    }
    ensure(worst_norm <= 10.0, || format!("‖z‖/‖x̄‖ = {worst_norm}"))?;
    ensure(worst_res <= 10.0, || format!("residual ratio {worst_res}"))?;
    Ok(format!(
        "‖z‖/‖x̄‖ ≤ {worst_norm:.2}, residual/(ε‖A‖‖x̄‖) ≤ {worst_res:.2}"
    ))
}

fn solver_agreement_i6(ctx: &Context) -> CheckResult {
    let grid = ctx.grid(12);
    let svd_opts = PanelOptions {
        solver: Solver::Svd,
        ..Default::default()
    };
    let qr_opts = PanelOptions {
        solver: Solver::Qr,
        ..Default::default()
    };
    let mut worst_panel: f64 = 0.0;
    let mut worst_total: f64 = 0.0;
    for j in 0..=24 {
        let lambda = 10f64.powf(-8.0 + 0.5 * j as f64);
        let it = Integrand::real(|x| 1.0 + x * x, move |x| lambda * x * x);
        // panels small enough to resolve the oscillation
        let width = (2.0f64).min((8.0 / lambda).sqrt());
        let mut a0 = -1.0;
        while a0 < 1.0 {
            let b0 = (a0 + width).min(1.0);
            let s = levin_panel(&it, a0, b0, &grid, &svd_opts).map_err(|e| e.to_string())?;
            let q = levin_panel(&it, a0, b0, &grid, &qr_opts).map_err(|e| e.to_string())?;
            worst_panel = worst_panel.max((s.value - q.value).norm() / (1.0 + s.value.norm()));
            a0 = b0;
        }
        if ctx.fault.is_none() {
            let p = integrand_for(IntegralId::I6, &params(&[("lambda", lambda)])).map_err(|e| e.to_string())?;
            let s = p
                .integrate(&AdaptiveConfig::default().with_solver(Solver::Svd))
                .map_err(|e| e.to_string())?;
            let q = p
                .integrate(&AdaptiveConfig::default().with_solver(Solver::Qr))
                .map_err(|e| e.to_string())?;
            worst_total = worst_total.max((s.value - q.value).norm());
        }
    }
    ensure(worst_panel <= 1e-11, || format!("panel disagreement {worst_panel:e}"))?;
    ensure(worst_total <= 1e-11, || {
        format!("integral disagreement {worst_total:e}")
    })?;
    Ok(format!("panel {worst_panel:.2e}, integral {worst_total:.2e}"))
}

fn gauss_invariants(_ctx: &Context) -> CheckResult {
    let mut worst: f64 = 0.0;
    for n in [1usize, 2, 3, 7, 16, 30, 50] {
        let r = gauss_rule(n).map_err(|e| e.to_string())?;
        let sum: f64 = r.weights.iter().sum();
        ensure((sum - 2.0).abs() <= 1e-14, || format!("n={n}: weight sum {sum}"))?;
        for i in 0..n {
            ensure(r.nodes[i] == -r.nodes[n - 1 - i], || format!("n={n}: asymmetric nodes"))?;
        }
        for d in 0..2 * n {
            let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(d as i32)).sum();
            worst = worst.max((got - exact).abs() / exact.max(1.0));
        }
    }
    ensure(worst <= 1e-13, || format!("monomial error {worst:e}"))?;
    Ok(format!("max rel error {worst:.2e}"))
}

fn sample_integrands() -> Vec<(Integrand, f64, f64)> {
    vec![
        (
            Integrand::real(|x: f64| x.cos() / (1.0 + x * x), |x| 40.0 * x * x * x),
            -1.0,
            1.0,
        ),
        (Integrand::real(|x: f64| (-x).exp() * x, |x| 25.0 * x * x), 0.0, 1.0),
        (
            Integrand::new(
                |x: f64| Complex64::new(1.0 + x, (2.0 * x).sin()),
                |x: f64| 30.0 * x.atan(),
            ),
            -0.5,
            0.75,
        ),
    ]
}

fn levin_conjugation(ctx: &Context) -> CheckResult {
    let grid = ctx.grid(12);
    let mut worst: f64 = 0.0;
    for solver in [Solver::Qr, Solver::Svd] {
        let opts = PanelOptions {
            solver,
            ..Default::default()
        };
        for (it, a, b) in sample_integrands() {
            let v = levin_panel(&it, a, b, &grid, &opts).map_err(|e| e.to_string())?.value;
            let w = levin_panel(&it.conjugate(), a, b, &grid, &opts)
                .map_err(|e| e.to_string())?
                .value;
            worst = worst.max((w - v.conj()).norm());
        }
    }
    ensure(worst <= 1e-13, || format!("conjugation defect {worst:e}"))?;
    Ok(format!("max defect {worst:.2e}"))
}

fn levin_affine(ctx: &Context) -> CheckResult {
    let grid = ctx.grid(12);
    let opts = PanelOptions::default();
    let mut worst: f64 = 0.0;
    for (it, a, b) in sample_integrands() {
        let v = levin_panel(&it, a, b, &grid, &opts).map_err(|e| e.to_string())?.value;
        let inner = it.clone();
        let inner_g = it.clone();
        let w = b - a;
        let pulled = Integrand::new(move |t| inner.f(a + t * w) * w, move |t| inner_g.g(a + t * w));
        let u = levin_panel(&pulled, 0.0, 1.0, &grid, &opts)
            .map_err(|e| e.to_string())?
            .value;
        worst = worst.max((u - v).norm() / v.norm().max(1e-300));
    }
    ensure(worst <= 1e-12, || format!("affine defect {worst:e}"))?;
    Ok(format!("max rel defect {worst:.2e}"))
}

fn levin_zero(ctx: &Context) -> CheckResult {
    let grid = ctx.grid(12);
    for solver in [Solver::Qr, Solver::Svd] {
        let opts = PanelOptions {
            solver,
            ..Default::default()
        };
        let it = Integrand::real(|_| 0.0, |x: f64| 1e5 * x.sin());
        let v = levin_panel(&it, -2.0, 3.0, &grid, &opts)
            .map_err(|e| e.to_string())?
            .value;
        ensure(v == Complex64::new(0.0, 0.0), || {
            format!("{solver}: zero amplitude gave {v}")
        })?;
    }
    let r = adaptive_integrate(&Integrand::real(|_| 0.0, |x| x), -1.0, 1.0, &AdaptiveConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(
        r.value == Complex64::new(0.0, 0.0) && r.status == QuadStatus::Converged,
        || format!("adaptive gave {:?}", r),
    )?;
    Ok("exact zero".into())
}

fn levin_low_frequency(ctx: &Context) -> CheckResult {
    let grid = ctx.grid(12);
    let mut worst: f64 = 0.0;
    for solver in [Solver::Qr, Solver::Svd] {
        let opts = PanelOptions {
            solver,
            ..Default::default()
        };
        let cfg = AdaptiveConfig::default().with_solver(solver);
        for lambda in [1e-8, 1e-4, 1e-2, 1.0] {
            let it = Integrand::real(|x| 1.0 + x * x, move |x| lambda * x * x);
            let o = adaptive_gauss(|x| it.value(x), -1.0, 1.0, 1e-15)
                .map_err(|e| e.to_string())?
                .value;
            if lambda <= 1e-4 {
                let v = levin_panel(&it, -1.0, 1.0, &grid, &opts)
                    .map_err(|e| e.to_string())?
                    .value;
                worst = worst.max((v - o).norm());
            }
            let r = adaptive_integrate(&it, -1.0, 1.0, &cfg).map_err(|e| e.to_string())?;
            ensure(r.status.is_converged(), || {
                format!("lambda={lambda}: status {}", r.status)
            })?;
            worst = worst.max((r.value - o).norm());
        }
    }
    ensure(worst <= 1e-11, || format!("error {worst:e}"))?;
    Ok(format!("max error {worst:.2e}"))
}

fn levin_stationary(ctx: &Context) -> CheckResult {
    let grid = ctx.grid(12);
    let opts = PanelOptions::default();
    let mut worst: f64 = 0.0;
    for (lambda, delta) in [(10.0, 0.1), (1e3, 0.01), (1e6, 3e-4)] {
        let it = Integrand::real(|x: f64| x.cos() / (1.0 + x * x), move |x| lambda * x * x);
        let v = levin_panel(&it, -delta, delta, &grid, &opts)
            .map_err(|e| e.to_string())?
            .value;
        let o = adaptive_gauss(|x| it.value(x), -delta, delta, 1e-15)
            .map_err(|e| e.to_string())?
            .value;
        worst = worst.max((v - o).norm());
    }
    ensure(worst <= 1e-10, || format!("stationary panel error {worst:e}"))?;
    Ok(format!("max error {worst:.2e}"))
}

fn adaptive_additivity(_ctx: &Context) -> CheckResult {
    let cfg = AdaptiveConfig::default();
    let mut worst: f64 = 0.0;
    for (it, a, b) in sample_integrands() {
        let c = a + 0.37 * (b - a);
        let whole = adaptive_integrate(&it, a, b, &cfg).map_err(|e| e.to_string())?;
        let l = adaptive_integrate(&it, a, c, &cfg).map_err(|e| e.to_string())?;
        let r = adaptive_integrate(&it, c, b, &cfg).map_err(|e| e.to_string())?;
        for q in [&whole, &l, &r] {
            ensure(q.status.is_converged(), || format!("status {}", q.status))?;
        }
        worst = worst.max((whole.value - l.value - r.value).norm());
    }
    ensure(worst <= 4.0 * cfg.eps, || format!("additivity defect {worst:e}"))?;
    Ok(format!("max defect {worst:.2e}"))
}

fn adaptive_determinism(_ctx: &Context) -> CheckResult {
    let cfg = AdaptiveConfig::default();
    for (it, a, b) in sample_integrands() {
        let r1 = adaptive_integrate(&it, a, b, &cfg).map_err(|e| e.to_string())?;
        let r2 = adaptive_integrate(&it, a, b, &cfg).map_err(|e| e.to_string())?;
        let same = r1.value.re.to_bits() == r2.value.re.to_bits()
            && r1.value.im.to_bits() == r2.value.im.to_bits()
            && r1.intervals_used == r2.intervals_used
            && r1.fevals == r2.fevals;
        ensure(same, || "repeated runs differ".into())?;
    }
    let _ = chebyshev::grid(12);
    Ok("bit-identical".into())
}
