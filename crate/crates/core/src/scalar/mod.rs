//! Scalar backends.
//!
//! Every geometric routine is generic over [`Scalar`]: exact quadratic-field
//! numbers for affine data, `f64` for sampled charts, and [`Dual`] numbers
//! layered over either one when derivatives along a chart are needed.

mod dual;
mod quad;

pub use dual::{Dual, DualScalar};
pub use quad::{
    metallic_disc, metallic_sigma, quad_conjugate, rat, QuadNum, QuadRepr, RatPair, Rational,
};

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Default absolute tolerance for float residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Field operations plus the handful of hooks the linear algebra needs to
/// make rank decisions.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_quad(x: &QuadNum) -> Self;
    /// Exact conversion for exact backends.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_exact() -> bool;
    /// Zero test on the primal value (exact for exact backends).
    fn is_zero(&self) -> bool;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Rank decision: exactly zero for exact backends, `|x| <= rel * scale`
    /// otherwise.
    fn is_negligible(&self, scale: f64, rel: f64) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.magnitude() <= rel * scale
        }
    }

    /// Residual acceptance: exact zero, or `|x| <= tol`.
    fn within(&self, tol: f64) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_quad(x: &QuadNum) -> Self {
        x.to_f64()
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for QuadNum {
    fn zero() -> Self {
        QuadNum::from_int(0)
    }
    fn one() -> Self {
        QuadNum::from_int(1)
    }
    fn from_i64(v: i64) -> Self {
        QuadNum::from_int(v)
    }
    fn from_quad(x: &QuadNum) -> Self {
        x.clone()
    }
    fn from_f64(x: f64) -> Self {
        QuadNum::rational(Rational::from_float(x).expect("finite float"))
    }
    fn to_f64(&self) -> f64 {
        QuadNum::to_f64(self)
    }
    fn is_exact() -> bool {
        true
    }
    fn is_zero(&self) -> bool {
        QuadNum::is_zero(self)
    }
}

/// Euclidean-free helpers on plain vectors of scalars.
pub mod vec_ops {
    use super::Scalar;

    pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
        a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
    }

    pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
        a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
    }

    pub fn scale<S: Scalar>(s: &S, a: &[S]) -> Vec<S> {
        a.iter().map(|x| s.clone() * x.clone()).collect()
    }

    /// `a + s·b`
    pub fn axpy<S: Scalar>(a: &[S], s: &S, b: &[S]) -> Vec<S> {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.clone() + s.clone() * y.clone())
            .collect()
    }

    pub fn zeros<S: Scalar>(n: usize) -> Vec<S> {
        vec![S::zero(); n]
    }

    pub fn neg<S: Scalar>(a: &[S]) -> Vec<S> {
        a.iter().map(|x| -x.clone()).collect()
    }

    /// Linear combination `Σ cᵢ vᵢ`.
    pub fn combo<S: Scalar>(coeffs: &[S], vectors: &[Vec<S>], dim: usize) -> Vec<S> {
        let mut out = zeros(dim);
        for (c, v) in coeffs.iter().zip(vectors) {
            out = axpy(&out, c, v);
        }
        out
    }

    pub fn max_abs<S: Scalar>(a: &[S]) -> f64 {
        a.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn to_f64<S: Scalar>(a: &[S]) -> Vec<f64> {
        a.iter().map(|x| x.to_f64()).collect()
    }
}
