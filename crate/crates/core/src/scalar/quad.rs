//! Exact numbers `a + b·√D` in the quadratic field that contains the
//! metallic number σ = (p + √D)/2, D = p² + 4q.
//!
//! `D` is carried unreduced. A value whose `disc` is zero is a plain
//! rational and combines with any field; two values with distinct nonzero
//! discriminants cannot be combined.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{MlhError, Result};

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Clone, Debug)]
pub struct QuadNum {
    a: Rational,
    b: Rational,
    disc: u64,
}

fn perfect_square_root(d: u64) -> Option<u64> {
    let r = d.sqrt();
    (r * r == d).then_some(r)
}

impl QuadNum {
    /// Builds `a + b·√disc`. When `disc` is a perfect square the surd is
    /// folded into `a` so that equality stays componentwise.
    pub fn new(a: Rational, b: Rational, disc: u64) -> Result<Self> {
        if disc == 0 && !b.is_zero() {
            return Err(MlhError::Domain(
                "irrational part requires a positive discriminant".into(),
            ));
        }
        let mut x = QuadNum { a, b, disc };
        x.normalize();
        Ok(x)
    }

    pub fn rational(a: Rational) -> Self {
        QuadNum {
            a,
            b: Rational::zero(),
            disc: 0,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::rational(Rational::from_integer(BigInt::from(v)))
    }

    /// Zero tagged with a discriminant, so that `zero_in(d) == 0` and it
    /// reports `disc() == d`.
    pub fn zero_in(disc: u64) -> Self {
        QuadNum {
            a: Rational::zero(),
            b: Rational::zero(),
            disc,
        }
    }

    fn normalize(&mut self) {
        if self.disc == 0 || self.b.is_zero() {
            return;
        }
        if let Some(r) = perfect_square_root(self.disc) {
            let b = std::mem::replace(&mut self.b, Rational::zero());
            self.a = &self.a + b * Rational::from_integer(BigInt::from(r));
        }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn disc(&self) -> u64 {
        self.disc
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn joint_disc(&self, other: &Self) -> Result<u64> {
        match (self.disc, other.disc) {
            (0, d) | (d, 0) => Ok(d),
            (l, r) if l == r => Ok(l),
            (l, r) => Err(MlhError::DiscMismatch { left: l, right: r }),
        }
    }

    /// `a + b√D ↦ a − b√D`.
    pub fn conj(&self) -> Self {
        QuadNum {
            a: self.a.clone(),
            b: -self.b.clone(),
            disc: self.disc,
        }
    }

    /// Field norm `a² − D·b²`; zero only for the zero element.
    pub fn norm(&self) -> Rational {
        let d = Rational::from_integer(BigInt::from(self.disc));
        &self.a * &self.a - d * &self.b * &self.b
    }

    fn combine_b(x: &Rational, y: &Rational, f: impl Fn(&Rational, &Rational) -> Rational) -> Rational {
        match (x.is_zero(), y.is_zero()) {
            (true, true) => Rational::zero(),
            _ => f(x, y),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let disc = self.joint_disc(other)?;
        let a = if other.a.is_zero() {
            self.a.clone()
        } else if self.a.is_zero() {
            other.a.clone()
        } else {
            &self.a + &other.a
        };
        Ok(QuadNum {
            a,
            b: Self::combine_b(&self.b, &other.b, |x, y| x + y),
            disc,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        let disc = self.joint_disc(other)?;
        let a = if other.a.is_zero() {
            self.a.clone()
        } else {
            &self.a - &other.a
        };
        Ok(QuadNum {
            a,
            b: Self::combine_b(&self.b, &other.b, |x, y| x - y),
            disc,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let disc = self.joint_disc(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(QuadNum::zero_in(disc));
        }
        // rational factors skip the surd cross terms
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, true) => Ok(QuadNum {
                a: &self.a * &other.a,
                b: Rational::zero(),
                disc,
            }),
            (true, false) => Ok(QuadNum {
                a: &self.a * &other.a,
                b: &self.a * &other.b,
                disc,
            }),
            (false, true) => Ok(QuadNum {
                a: &self.a * &other.a,
                b: &self.b * &other.a,
                disc,
            }),
            (false, false) => {
                let d = Rational::from_integer(BigInt::from(disc));
                Ok(QuadNum {
                    a: &self.a * &other.a + d * &self.b * &other.b,
                    b: &self.a * &other.b + &self.b * &other.a,
                    disc,
                })
            }
        }
    }

    pub fn recip(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(MlhError::Arithmetic("division by zero".into()));
        }
        Ok(QuadNum {
            a: &self.a / &n,
            b: -(&self.b / &n),
            disc: self.disc,
        })
    }

    /// Division rationalised through the conjugate.
    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.joint_disc(other)?;
        self.try_mul(&other.recip()?)
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        a + self.b.to_f64().unwrap_or(f64::NAN) * (self.disc as f64).sqrt()
    }

    /// Sign of the real number, computed exactly.
    pub fn signum(&self) -> i32 {
        // compare a with −b√D by squaring when signs differ
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 || self.disc == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return if sa == 0 { sb } else { sa };
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * Rational::from_integer(BigInt::from(self.disc));
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }
}

fn sign_of(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// The (p,q)-metallic number σ = (p + √(p²+4q))/2.
pub fn metallic_sigma(p: i64, q: i64) -> Result<QuadNum> {
    if p < 1 || q < 1 {
        return Err(MlhError::Domain(format!(
            "metallic parameters must be positive, got p={p}, q={q}"
        )));
    }
    let disc = (p * p + 4 * q) as u64;
    QuadNum::new(rat(p, 2), rat(1, 2), disc)
}

/// Discriminant p² + 4q of the metallic field.
pub fn metallic_disc(p: i64, q: i64) -> u64 {
    (p * p + 4 * q) as u64
}

/// `conj(x)`; for σ this is `p − σ`.
pub fn quad_conjugate(x: &QuadNum) -> QuadNum {
    x.conj()
}

impl PartialEq for QuadNum {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
            && self.b == other.b
            && (self.b.is_zero() || self.disc == other.disc)
    }
}

impl Eq for QuadNum {}

impl Add for QuadNum {
    type Output = QuadNum;
    fn add(self, rhs: QuadNum) -> QuadNum {
        self.try_add(&rhs).expect("QuadNum addition")
    }
}

impl Sub for QuadNum {
    type Output = QuadNum;
    fn sub(self, rhs: QuadNum) -> QuadNum {
        self.try_sub(&rhs).expect("QuadNum subtraction")
    }
}

impl Mul for QuadNum {
    type Output = QuadNum;
    fn mul(self, rhs: QuadNum) -> QuadNum {
        self.try_mul(&rhs).expect("QuadNum multiplication")
    }
}

impl Div for QuadNum {
    type Output = QuadNum;
    fn div(self, rhs: QuadNum) -> QuadNum {
        self.try_div(&rhs).expect("QuadNum division")
    }
}

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum {
            a: -self.a,
            b: -self.b,
            disc: self.disc,
        }
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            write!(f, "{}·√{}", self.b, self.disc)
        } else if self.b.is_negative() {
            write!(f, "{} - {}·√{}", self.a, -self.b.clone(), self.disc)
        } else {
            write!(f, "{} + {}·√{}", self.a, self.b, self.disc)
        }
    }
}

/// `[num, den]` on the wire. Integers that do not fit in an `i64` are
/// written as decimal strings.
#[derive(Clone, Debug, PartialEq)]
pub struct RatPair(pub Rational);

fn int_to_json(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(i) => serde_json::Value::from(i),
        None => serde_json::Value::String(v.to_string()),
    }
}

fn int_from_json(v: &serde_json::Value) -> std::result::Result<BigInt, String> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| format!("not an integer: {n}")),
        serde_json::Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|e| format!("bad integer {s:?}: {e}")),
        other => Err(format!("expected integer, got {other}")),
    }
}

impl Serialize for RatPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = serde_json::Value::Array(vec![int_to_json(self.0.numer()), int_to_json(self.0.denom())]);
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let v = serde_json::Value::deserialize(d)?;
        let arr = v
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| D::Error::custom("rational must be [num, den]"))?;
        let num = int_from_json(&arr[0]).map_err(D::Error::custom)?;
        let den = int_from_json(&arr[1]).map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(RatPair(Rational::new(num, den)))
    }
}

/// Wire form of a [`QuadNum`]: `{"a": [num,den], "b": [num,den]}`; the
/// discriminant comes from the surrounding manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadRepr {
    pub a: RatPair,
    pub b: RatPair,
}

impl QuadRepr {
    pub fn into_quad(self, disc: u64) -> Result<QuadNum> {
        QuadNum::new(self.a.0, self.b.0, disc).map_err(|e| MlhError::Schema(e.to_string()))
    }
}

impl From<&QuadNum> for QuadRepr {
    fn from(x: &QuadNum) -> Self {
        QuadRepr {
            a: RatPair(x.a.clone()),
            b: RatPair(x.b.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: (i64, i64), b: (i64, i64), d: u64) -> QuadNum {
        QuadNum::new(rat(a.0, a.1), rat(b.0, b.1), d).unwrap()
    }

    #[test]
    fn golden_and_silver_closed_forms() {
        assert_eq!(metallic_sigma(1, 1).unwrap(), q((1, 2), (1, 2), 5));
        // 1 + √2 written over D = 8: (2 + √8)/2
        let silver = metallic_sigma(2, 1).unwrap();
        assert_eq!(silver.disc(), 8);
        let two_sqrt2 = q((0, 1), (1, 2), 8);
        assert_eq!(silver, QuadNum::from_int(1) + two_sqrt2);
        assert!((silver.to_f64() - (1.0 + 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn sigma_domain_errors() {
        assert!(matches!(metallic_sigma(0, 1), Err(MlhError::Domain(_))));
        assert!(matches!(metallic_sigma(1, -2), Err(MlhError::Domain(_))));
    }

    #[test]
    fn conjugate_identities() {
        for (p, qq) in [(1, 1), (2, 1), (3, 2), (5, 7)] {
            let s = metallic_sigma(p, qq).unwrap();
            let c = quad_conjugate(&s);
            assert_eq!(c.clone() + s.clone(), QuadNum::from_int(p));
            assert_eq!(c * s, QuadNum::from_int(-qq));
        }
        let g = metallic_sigma(1, 1).unwrap();
        assert_eq!(quad_conjugate(&g), q((1, 2), (-1, 2), 5));
    }

    #[test]
    fn field_examples() {
        let g = metallic_sigma(1, 1).unwrap();
        assert_eq!(g.recip().unwrap(), g.clone() - QuadNum::from_int(1));
        let s = metallic_sigma(2, 1).unwrap();
        // (1+√2)² = 3 + 2√2; over D = 8 that is 3 + √8
        assert_eq!(s.clone() * s, q((3, 1), (1, 1), 8));
    }

    #[test]
    fn perfect_square_discriminant_folds() {
        // p=1,q=2: D=9, σ=2
        let s = metallic_sigma(1, 2).unwrap();
        assert_eq!(s, QuadNum::from_int(2));
        assert!(s.is_rational());
    }

    #[test]
    fn mismatch_and_zero_division() {
        let a = metallic_sigma(1, 1).unwrap();
        let b = metallic_sigma(2, 1).unwrap();
        assert!(matches!(a.try_add(&b), Err(MlhError::DiscMismatch { .. })));
        assert!(matches!(
            a.try_div(&QuadNum::zero_in(5)),
            Err(MlhError::Arithmetic(_))
        ));
        // rationals mix with anything
        assert!(a.try_mul(&QuadNum::from_int(3)).is_ok());
    }

    #[test]
    fn exact_sign() {
        let g = metallic_sigma(1, 1).unwrap();
        assert_eq!(g.signum(), 1);
        assert_eq!(quad_conjugate(&g).signum(), -1);
        assert_eq!((g.clone() - g).signum(), 0);
        assert_eq!(q((-3, 1), (1, 1), 8).signum(), -1); // -3 + 2.83
    }

    #[test]
    fn wire_round_trip_is_bit_exact() {
        let big = BigInt::parse_bytes(b"123456789012345678901234567891", 10).unwrap();
        let x = QuadNum::new(
            Rational::new(big.clone(), BigInt::from(7)),
            rat(-3, 4),
            13,
        )
        .unwrap();
        let text = serde_json::to_string(&QuadRepr::from(&x)).unwrap();
        assert_eq!(
            text,
            r#"{"a":["123456789012345678901234567891",7],"b":[-3,4]}"#
        );
        let back: QuadRepr = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_quad(13).unwrap(), x);
    }
}
