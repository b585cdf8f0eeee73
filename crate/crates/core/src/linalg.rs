//! Dense complex linear algebra for the small systems produced by Levin
//! collocation: one-sided Jacobi SVD, truncated-SVD solves and a
//! column-pivoted Householder QR with a minimum-norm solve on the retained
//! columns.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Maximum number of Jacobi sweeps before the SVD reports failure.
pub const MAX_SWEEPS: usize = 30;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_diag(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Wraps a real row-major matrix.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(CMatrix {
            rows,
            cols,
            data: data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "mul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot_conj(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn check_square(a: &CMatrix, y: &[Complex64]) -> Result<usize> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            got: a.cols,
        });
    }
    if y.len() != a.rows {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            got: y.len(),
        });
    }
    if !a.is_finite() || y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    Ok(a.rows)
}

/// Upper bound on the operator norm: the Frobenius norm, which lies in
/// `[σ₁, √k σ₁]`.
pub fn op_norm_estimate(a: &CMatrix) -> f64 {
    a.frobenius_norm()
}

/// `A = U diag(σ) V*` with σ sorted in decreasing order.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

/// Diagnostics from a truncated solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    /// Number of retained singular directions (or pivoted QR columns).
    pub rank_used: usize,
    pub threshold: f64,
    pub solution_norm: f64,
}

/// Alias kept for callers that only use the SVD path.
pub type TsvdSolveReport = SolveReport;

/// Singular value decomposition of a square complex matrix by one-sided
/// (Hestenes) Jacobi rotations.
pub fn svd(a: &CMatrix) -> Result<SvdFactors> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            got: a.cols,
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows;
    let mut w: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { ONE } else { ZERO }).collect())
        .collect();
    let tol = n as f64 * f64::EPSILON;

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = dot_conj(&w[p], &w[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + 1f64.hypot(zeta));
                let c = 1.0 / 1f64.hypot(t);
                let s = c * t;
                rotate(&mut w, p, q, phase, c, s);
                rotate(&mut v, p, q, phase, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<f64> = w.iter().map(|c| vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (pos, &j) in order.iter().enumerate() {
        let s = norms[j];
        if s > 0.0 && s.is_normal() {
            u_cols.push(w[j].iter().map(|z| z / s).collect());
        } else {
            u_cols.push(vec![ZERO; n]);
            deficient.push(pos);
        }
    }
    complete_orthonormal(&mut u_cols, &deficient);

    let u = CMatrix::from_fn(n, n, |i, j| u_cols[j][i]);
    let vm = CMatrix::from_fn(n, n, |i, j| v[order[j]][i]);
    let sigma = sigma
        .into_iter()
        .zip(0..)
        .map(|(s, pos)| if deficient.contains(&pos) { 0.0 } else { s })
        .collect();
    Ok(SvdFactors { u, sigma, v: vm })
}

fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, phase: Complex64, c: f64, s: f64) {
    let pc = phase.conj();
    let (lo, hi) = cols.split_at_mut(q);
    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let a = *xp;
        let b = pc * *xq;
        *xp = a * c - b * s;
        *xq = a * s + b * c;
    }
}

/// Fills the columns listed in `missing` with unit vectors orthogonal to all
/// other columns (two passes of Gram–Schmidt against coordinate vectors).
fn complete_orthonormal(cols: &mut [Vec<Complex64>], missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let n = cols.len();
    let mut filled: Vec<bool> = (0..n).map(|j| !missing.contains(&j)).collect();
    let mut candidate = 0;
    for &slot in missing {
        while candidate < n {
            let mut e = vec![ZERO; n];
            e[candidate] = ONE;
            candidate += 1;
            for _ in 0..2 {
                for (j, col) in cols.iter().enumerate() {
                    if filled[j] {
                        let d = dot_conj(col, &e);
                        for (ei, ci) in e.iter_mut().zip(col) {
                            *ei -= d * ci;
                        }
                    }
                }
            }
            let nrm = vec_norm(&e);
            if nrm > 0.5 {
                cols[slot] = e.into_iter().map(|z| z / nrm).collect();
                filled[slot] = true;
                break;
            }
        }
    }
}

impl SvdFactors {
    /// Number of singular values `≥ threshold`.
    pub fn rank_at(&self, threshold: f64) -> usize {
        self.sigma.iter().take_while(|&&s| s >= threshold).count()
    }

    /// `x = Σ_{i ≤ l} (uᵢ* y / σᵢ) vᵢ` where `l` counts `σᵢ ≥ threshold`.
    pub fn solve_truncated(&self, y: &[Complex64], threshold: f64) -> (Vec<Complex64>, SolveReport) {
        let n = self.sigma.len();
        let rank = self.rank_at(threshold);
        let mut x = vec![ZERO; n];
        for i in 0..rank {
            let mut coef = ZERO;
            for r in 0..n {
                coef += self.u[(r, i)].conj() * y[r];
            }
            coef /= self.sigma[i];
            for (r, xr) in x.iter_mut().enumerate() {
                *xr += coef * self.v[(r, i)];
            }
        }
        let report = SolveReport {
            rank_used: rank,
            threshold,
            solution_norm: vec_norm(&x),
        };
        (x, report)
    }
}

/// Truncated-SVD solve of `A x = y`, discarding singular values below `threshold`.
///
/// If no singular value reaches the threshold the solution is zero and
/// `rank_used` is 0.
pub fn tsvd_solve(a: &CMatrix, y: &[Complex64], threshold: f64) -> Result<(Vec<Complex64>, SolveReport)> {
    check_square(a, y)?;
    check_threshold(threshold)?;
    Ok(svd(a)?.solve_truncated(y, threshold))
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "truncation threshold must be positive and finite, got {threshold}"
        )));
    }
    Ok(())
}

/// Householder reflector stored as `H = I − τ v v*` acting on rows `start..`.
#[derive(Clone, Debug)]
struct Reflector {
    start: usize,
    v: Vec<Complex64>,
    tau: f64,
}

impl Reflector {
    /// Builds the reflector mapping `x` to `α e₁` with `|α| = ‖x‖`.
    /// Returns `None` for a zero vector.
    fn new(start: usize, x: &[Complex64]) -> Option<(Self, Complex64)> {
        let nrm = vec_norm(x);
        if nrm == 0.0 {
            return None;
        }
        let x0 = x[0];
        let unit = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -unit * nrm;
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv == 0.0 {
            return None;
        }
        Some((
            Reflector {
                start,
                v,
                tau: 2.0 / vv,
            },
            alpha,
        ))
    }

    fn apply(&self, col: &mut [Complex64]) {
        let seg = &mut col[self.start..];
        let d = dot_conj(&self.v, seg) * self.tau;
        for (c, vi) in seg.iter_mut().zip(&self.v) {
            *c -= d * vi;
        }
    }
}

/// Column-pivoted Householder QR, `A P = Q R`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    n: usize,
    /// Columns of R (upper part meaningful), in pivoted order.
    r_cols: Vec<Vec<Complex64>>,
    reflectors: Vec<Reflector>,
    /// `perm[j]` is the original column placed at position j.
    perm: Vec<usize>,
}

impl PivotedQr {
    pub fn factor(a: &CMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::DimensionMismatch {
                expected: a.rows,
                got: a.cols,
            });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = a.rows;
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut reflectors = Vec::with_capacity(n);
        for j in 0..n {
            let (best, _) = (j..n)
                .map(|c| (c, cols[c][j..].iter().map(|z| z.norm_sqr()).sum::<f64>()))
                .fold((j, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            cols.swap(j, best);
            perm.swap(j, best);
            if let Some((h, alpha)) = Reflector::new(j, &cols[j][j..]) {
                cols[j][j] = alpha;
                for z in cols[j][j + 1..].iter_mut() {
                    *z = ZERO;
                }
                for c in cols.iter_mut().skip(j + 1) {
                    h.apply(c);
                }
                reflectors.push(h);
            }
        }
        Ok(PivotedQr {
            n,
            r_cols: cols,
            reflectors,
            perm,
        })
    }

    /// `|r_jj|` along the diagonal of R; non-increasing up to roundoff.
    pub fn r_diag_abs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.r_cols[j][j].norm()).collect()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Number of leading diagonal entries with `|r_jj| ≥ threshold`.
    pub fn rank_at(&self, threshold: f64) -> usize {
        self.r_diag_abs().iter().take_while(|&&r| r >= threshold).count()
    }

    /// Minimum-norm solution of the rank-`r` truncated system
    /// `[R₁₁ R₁₂] z = (Q* y)[..r]`, `x = P z`.
    pub fn solve_truncated(&self, y: &[Complex64], threshold: f64) -> (Vec<Complex64>, SolveReport) {
        let n = self.n;
        let rank = self.rank_at(threshold);
        let mut c = y.to_vec();
        for h in &self.reflectors {
            h.apply(&mut c);
        }
        let mut z = vec![ZERO; n];
        if rank == n {
            for i in (0..n).rev() {
                let mut s = c[i];
                for j in i + 1..n {
                    s -= self.r_cols[j][i] * z[j];
                }
                z[i] = s / self.r_cols[i][i];
            }
        } else if rank > 0 {
            z = self.min_norm_trapezoidal(&c[..rank], rank);
        }
        let mut x = vec![ZERO; n];
        for (j, &p) in self.perm.iter().enumerate() {
            x[p] = z[j];
        }
        let report = SolveReport {
            rank_used: rank,
            threshold,
            solution_norm: vec_norm(&x),
        };
        (x, report)
    }

    /// Solves the `r × n` trapezoidal system `T z = c` (T = top rows of R)
    /// in the minimum-norm sense via a QR factorization of `T*`.
    fn min_norm_trapezoidal(&self, c: &[Complex64], r: usize) -> Vec<Complex64> {
        let n = self.n;
        // columns of T* are conj of rows of T
        let mut cols: Vec<Vec<Complex64>> = (0..r)
            .map(|i| {
                (0..n)
                    .map(|j| if j >= i { self.r_cols[j][i].conj() } else { ZERO })
                    .collect()
            })
            .collect();
        let mut refl = Vec::with_capacity(r);
        for j in 0..r {
            match Reflector::new(j, &cols[j][j..]) {
                Some((h, alpha)) => {
                    cols[j][j] = alpha;
                    for z in cols[j][j + 1..].iter_mut() {
                        *z = ZERO;
                    }
                    for col in cols.iter_mut().skip(j + 1) {
                        h.apply(col);
                    }
                    refl.push(Some(h));
                }
                None => refl.push(None),
            }
        }
        // T = S* Q2*, solve S* w = c by forward substitution.
        let mut w = vec![ZERO; n];
        for i in 0..r {
            let mut s = c[i];
            for (j, wj) in w.iter().enumerate().take(i) {
                s -= cols[i][j].conj() * wj;
            }
            let d = cols[i][i].conj();
            w[i] = if d == ZERO { ZERO } else { s / d };
        }
        // z = Q2 w, Q2 = H_0 H_1 … H_{r−1}
        for h in refl.iter().rev().flatten() {
            h.apply(&mut w);
        }
        w
    }
}

/// Rank-revealing QR solve of `A x = y`. Columns whose pivoted `|r_jj|`
/// falls below `threshold` are dropped and the minimum-norm solution on the
/// retained columns is returned.
pub fn qr_solve_pivoted(a: &CMatrix, y: &[Complex64], threshold: f64) -> Result<(Vec<Complex64>, SolveReport)> {
    check_square(a, y)?;
    check_threshold(threshold)?;
    Ok(PivotedQr::factor(a)?.solve_truncated(y, threshold))
}
