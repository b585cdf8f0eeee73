//! Chebyshev extremal grids, interpolation coefficients and spectral
//! differentiation.
//!
//! The k-point extremal (Chebyshev–Lobatto) grid on [-1, 1] is
//!
//! ```text
//! xⱼ = cos(π (k − j) / (k − 1)),   j = 1, …, k
//! ```
//!
//! stored in ascending order with the endpoints pinned to exactly ±1.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest supported collocation order.
pub const MIN_ORDER: usize = 2;

/// Precomputed extremal nodes and differentiation matrix on [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct ChebGrid {
    k: usize,
    nodes: Vec<f64>,
    /// row-major k×k
    diff: Vec<f64>,
}

impl ChebGrid {
    pub fn new(k: usize) -> Result<Self> {
        Ok(ChebGrid {
            k,
            nodes: cheb_nodes(k)?,
            diff: diff_matrix(k)?,
        })
    }

    /// Builds a grid from explicit parts. Used to inject faults in the self-test.
    pub fn from_parts(nodes: Vec<f64>, diff: Vec<f64>) -> Result<Self> {
        let k = nodes.len();
        if k < MIN_ORDER {
            return Err(Error::InvalidOrder { k, min: MIN_ORDER });
        }
        if diff.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                got: diff.len(),
            });
        }
        Ok(ChebGrid { k, nodes, diff })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// The differentiation matrix, row-major.
    pub fn diff(&self) -> &[f64] {
        &self.diff
    }

    #[inline]
    pub fn diff_entry(&self, i: usize, j: usize) -> f64 {
        self.diff[i * self.k + j]
    }

    /// Applies the differentiation matrix on [-1, 1] to node values.
    pub fn differentiate<T>(&self, values: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        check_len(self.k, values.len())?;
        Ok(apply(&self.diff, self.k, values, 1.0))
    }

    /// Pulls the grid back to `[a, b]`.
    pub fn map_to_interval(&self, a: f64, b: f64) -> Result<MappedGrid> {
        map_to_interval(self, a, b)
    }
}

/// A grid mapped affinely onto `[a, b]`.
#[derive(Clone, Debug)]
pub struct MappedGrid {
    pub a: f64,
    pub b: f64,
    /// Nodes on `[a, b]`; first and last are exactly `a` and `b`.
    pub nodes: Vec<f64>,
    /// Differentiation matrix scaled by `2 / (b − a)`, row-major.
    pub diff: Vec<f64>,
    pub scale: f64,
}

impl MappedGrid {
    pub fn k(&self) -> usize {
        self.nodes.len()
    }

    pub fn differentiate<T>(&self, values: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        check_len(self.k(), values.len())?;
        Ok(apply(&self.diff, self.k(), values, 1.0))
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn apply<T>(m: &[f64], k: usize, values: &[T], scale: f64) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    m.chunks_exact(k)
        .map(|row| {
            row.iter()
                .zip(values)
                .fold(T::default(), |acc, (&d, &v)| acc + v * (d * scale))
        })
        .collect()
}

fn check_order(k: usize) -> Result<()> {
    if k < MIN_ORDER {
        return Err(Error::InvalidOrder { k, min: MIN_ORDER });
    }
    Ok(())
}

/// The k extremal Chebyshev nodes on [-1, 1], ascending.
///
/// Evaluated as `sin(π (2i − n) / (2n))` with `n = k − 1`, which equals the
/// cosine form but is exactly antisymmetric in floating point.
pub fn cheb_nodes(k: usize) -> Result<Vec<f64>> {
    check_order(k)?;
    let n = (k - 1) as f64;
    let mut nodes: Vec<f64> = (0..k).map(|i| (PI * (2.0 * i as f64 - n) / (2.0 * n)).sin()).collect();
    nodes[0] = -1.0;
    nodes[k - 1] = 1.0;
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    Ok(nodes)
}

/// The k×k spectral differentiation matrix on the extremal grid (row-major).
///
/// Off-diagonal entries use the closed form `(cᵢ/cⱼ)(−1)^{i+j}/(xᵢ − xⱼ)`
/// with node differences from a product-of-sines identity; diagonal entries
/// are the negated row sums so that constants differentiate to zero.
pub fn diff_matrix(k: usize) -> Result<Vec<f64>> {
    check_order(k)?;
    let n = k - 1;
    let nf = n as f64;
    let c = |i: usize| if i == 0 || i == n { 2.0 } else { 1.0 };
    let mut d = vec![0.0; k * k];
    for i in 0..k {
        let mut row_sum = 0.0;
        for j in 0..k {
            if i == j {
                continue;
            }
            let (fi, fj) = (i as f64, j as f64);
            let dx = 2.0 * (PI * (fi + fj - nf) / (2.0 * nf)).cos() * (PI * (fi - fj) / (2.0 * nf)).sin();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let v = c(i) / c(j) * sign / dx;
            d[i * k + j] = v;
            row_sum += v;
        }
        d[i * k + i] = -row_sum;
    }
    Ok(d)
}

/// Returns the shared grid of order `k`, building it on first use.
pub fn grid(k: usize) -> Result<Arc<ChebGrid>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<ChebGrid>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(g) = cache.read().unwrap_or_else(|e| e.into_inner()).get(&k) {
        return Ok(g.clone());
    }
    let built = Arc::new(ChebGrid::new(k)?);
    let mut w = cache.write().unwrap_or_else(|e| e.into_inner());
    Ok(w.entry(k).or_insert(built).clone())
}

/// `Tₙ(x_j)` at extremal node `j` (ascending, 0-based), reduced modulo the period.
fn chebyshev_at_node(n: usize, j: usize, k: usize) -> f64 {
    let period = 2 * (k - 1);
    let m = (k - 1 - j) * n % period;
    (PI * m as f64 / (k - 1) as f64).cos()
}

/// Coefficients `a₀ … a_{k−1}` of the degree < k interpolant through samples
/// at the ascending extremal nodes, by the direct discrete-orthogonality sum.
pub fn cheb_coeffs<T>(values: &[T]) -> Result<Vec<T>>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let k = values.len();
    check_order(k)?;
    let last = k - 1;
    let coeffs = (0..k)
        .map(|n| {
            let outer = if n == 0 || n == last { 1.0 } else { 2.0 } / last as f64;
            values.iter().enumerate().fold(T::default(), |acc, (j, &v)| {
                let half = if j == 0 || j == last { 0.5 } else { 1.0 };
                acc + v * (half * outer * chebyshev_at_node(n, j, k))
            })
        })
        .collect();
    Ok(coeffs)
}

/// Evaluates `Σ aₙ Tₙ(x)` by Clenshaw's recurrence.
pub fn cheb_eval(coeffs: &[Complex64], x: f64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().skip(1).rev() {
        let b0 = a + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.first() {
        Some(&a0) => a0 + b1 * x - b2,
        None => Complex64::new(0.0, 0.0),
    }
}

/// Real-coefficient variant of [`cheb_eval`].
pub fn cheb_eval_real(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &a in coeffs.iter().skip(1).rev() {
        let b0 = a + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().map_or(0.0, |&a0| a0 + x * b1 - b2)
}

/// Maps `grid` onto `[a, b]`: nodes `a + (x + 1)(b − a)/2`, derivative scale `2/(b − a)`.
pub fn map_to_interval(grid: &ChebGrid, a: f64, b: f64) -> Result<MappedGrid> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidInterval { a, b });
    }
    let half = 0.5 * (b - a);
    let scale = 2.0 / (b - a);
    if !scale.is_finite() {
        return Err(Error::InvalidInterval { a, b });
    }
    let k = grid.k;
    let mut nodes: Vec<f64> = grid.nodes.iter().map(|&x| a + (x + 1.0) * half).collect();
    nodes[0] = a;
    nodes[k - 1] = b;
    let diff = grid.diff.iter().map(|&d| d * scale).collect();
    Ok(MappedGrid {
        a,
        b,
        nodes,
        diff,
        scale,
    })
}
