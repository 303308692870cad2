//! Forward-mode dual numbers with one partial per chart coordinate.
//!
//! Constants carry an empty partial vector and are treated as having all
//! partials zero, so they mix freely with seeded variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{QuadNum, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Dual<T> {
    pub value: T,
    pub partials: Vec<T>,
}

/// Float dual number used for sampled charts.
pub type DualScalar = Dual<f64>;

impl<T: Scalar> Dual<T> {
    pub fn constant(value: T) -> Self {
        Dual {
            value,
            partials: Vec::new(),
        }
    }

    /// Coordinate `index` of an `n`-dimensional chart, seeded with a unit
    /// partial.
    pub fn variable(value: T, index: usize, n: usize) -> Self {
        let mut partials = vec![T::zero(); n];
        partials[index] = T::one();
        Dual { value, partials }
    }

    pub fn new(value: T, partials: Vec<T>) -> Self {
        Dual { value, partials }
    }

    pub fn partial(&self, i: usize) -> T {
        self.partials.get(i).cloned().unwrap_or_else(T::zero)
    }

    /// Directional derivative `Σ dirᵢ ∂ᵢ`.
    pub fn directional(&self, dir: &[T]) -> T {
        let mut acc = T::zero();
        for (i, d) in dir.iter().enumerate() {
            if let Some(p) = self.partials.get(i) {
                acc = acc + d.clone() * p.clone();
            }
        }
        acc
    }

    fn zip_partials(a: &[T], b: &[T], f: impl Fn(T, T) -> T) -> Vec<T> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(T::zero);
                let y = b.get(i).cloned().unwrap_or_else(T::zero);
                f(x, y)
            })
            .collect()
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual {
            value: self.value + rhs.value,
            partials: Self::zip_partials(&self.partials, &rhs.partials, |a, b| a + b),
        }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual {
            value: self.value - rhs.value,
            partials: Self::zip_partials(&self.partials, &rhs.partials, |a, b| a - b),
        }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (u, v) = (self.value.clone(), rhs.value.clone());
        Dual {
            value: self.value * rhs.value,
            partials: Self::zip_partials(&self.partials, &rhs.partials, |a, b| {
                a * v.clone() + u.clone() * b
            }),
        }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let (u, v) = (self.value.clone(), rhs.value.clone());
        let v2 = v.clone() * v.clone();
        Dual {
            value: self.value / rhs.value,
            partials: Self::zip_partials(&self.partials, &rhs.partials, |a, b| {
                (a * v.clone() - u.clone() * b) / v2.clone()
            }),
        }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            value: -self.value,
            partials: self.partials.into_iter().map(|p| -p).collect(),
        }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn zero() -> Self {
        Self::constant(T::zero())
    }
    fn one() -> Self {
        Self::constant(T::one())
    }
    fn from_i64(v: i64) -> Self {
        Self::constant(T::from_i64(v))
    }
    fn from_quad(x: &QuadNum) -> Self {
        Self::constant(T::from_quad(x))
    }
    fn from_f64(x: f64) -> Self {
        Self::constant(T::from_f64(x))
    }
    fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
    fn is_exact() -> bool {
        T::is_exact()
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}
