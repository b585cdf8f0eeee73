//! Adaptive Levin quadrature for highly oscillatory integrals.
//!
//! Evaluates integrals of the form
//!
//! ```text
//!   b
//!   ⌠
//!   ⎮ f(x) exp(i g(x)) dx
//!   ⌡
//!   a
//! ```
//!
//! (and the cos/sin kernel variants) by collocating the Levin equation
//! `p' + i g' p = f` on a Chebyshev extremal grid over each subinterval,
//! solving the resulting k×k system with a truncated SVD or a rank-revealing
//! QR factorization, and bisecting adaptively until the whole-interval and
//! two-halves estimates agree.
//!
//! The crate is organized as
//!
//! * [`chebyshev`]: extremal grids, interpolation coefficients, differentiation matrices
//! * [`linalg`]: small dense complex SVD, truncated-SVD and pivoted-QR solves
//! * [`levin`]: the single-panel Levin estimate
//! * [`adaptive`]: the bisection driver
//! * [`oracle`]: adaptive Gauss–Legendre quadrature used for cross-validation
//! * [`expr`]: a tiny expression language so integrands can be given as strings
//! * [`reference`]: the catalog of benchmark integrals with closed forms
//! * [`selftest`]: the invariant suite run by `levin selftest`

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod chebyshev;
mod error;
pub mod expr;
pub mod levin;
pub mod linalg;
pub mod oracle;
pub mod reference;
pub mod selftest;

pub use adaptive::{adaptive_integrate, AdaptiveConfig, QuadResult, QuadStatus, Solver};
pub use error::{Error, Result};
pub use levin::{Integrand, Kernel};
pub use num_complex::Complex64;
