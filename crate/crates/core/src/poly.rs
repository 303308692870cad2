//! Multivariate polynomials with exact quadratic-field coefficients, and a
//! small parser for chart components such as `"u1^2 - sigma*u2 + 3/2"`.

use std::collections::BTreeMap;

use crate::error::{MlhError, Result};
use crate::scalar::{metallic_sigma, QuadNum, Rational, Scalar};

/// Exponent vector → coefficient. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, QuadNum>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: QuadNum) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, QuadNum::from_int(1));
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: QuadNum) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.remove(&exps);
        let sum = match entry {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(exps, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &QuadNum) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, k) in &self.terms {
            out.add_term(e.clone(), k.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, QuadNum::from_int(1));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// The constant term, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<QuadNum> {
        match self.terms.len() {
            0 => Some(QuadNum::from_int(0)),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(e, _)| e.iter().all(|&x| x == 0))
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c.clone() * QuadNum::from_int(e[var] as i64));
        }
        out
    }

    pub fn eval<S: Scalar>(&self, point: &[S]) -> S {
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut t = S::from_quad(c);
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Parses an expression in `u1 .. u{nvars}`; `sigma`, `p` and `q` refer
    /// to the metallic parameters.
    pub fn parse(src: &str, nvars: usize, p: i64, q: i64) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            nvars,
            p,
            q,
        };
        let poly = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(MlhError::Schema(format!(
                "unexpected trailing input in {src:?}"
            )));
        }
        Ok(poly)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(parse_decimal(&text)?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(MlhError::Schema(format!("unexpected character {c:?} in {src:?}")));
        }
    }
    Ok(out)
}

fn parse_decimal(text: &str) -> Result<Rational> {
    let bad = || MlhError::Schema(format!("bad number {text:?}"));
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: num_bigint::BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
    Ok(Rational::new(num, den))
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    nvars: usize,
    p: i64,
    q: i64,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat_op('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat_op('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_op('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat_op('/') {
                let d = self.unary()?;
                let c = d.as_constant().filter(|c| !c.is_zero()).ok_or_else(|| {
                    MlhError::Schema("division only by nonzero constants".into())
                })?;
                acc = acc.scale(&c.recip()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if self.eat_op('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.eat_op('^') {
            match self.tokens.get(self.pos).cloned() {
                Some(Tok::Num(r)) if r.is_integer() => {
                    self.pos += 1;
                    let k: u32 = r
                        .to_integer()
                        .try_into()
                        .map_err(|_| MlhError::Schema("exponent too large".into()))?;
                    Ok(base.pow(k))
                }
                _ => Err(MlhError::Schema("exponent must be a non-negative integer".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let n = self.nvars;
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(Polynomial::constant(n, QuadNum::rational(r)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "sigma" => Ok(Polynomial::constant(n, metallic_sigma(self.p, self.q)?)),
                    "p" => Ok(Polynomial::constant(n, QuadNum::from_int(self.p))),
                    "q" => Ok(Polynomial::constant(n, QuadNum::from_int(self.q))),
                    v if v.starts_with('u') => {
                        let idx: usize = v[1..]
                            .parse()
                            .map_err(|_| MlhError::Schema(format!("unknown symbol {v:?}")))?;
                        if idx == 0 || idx > n {
                            return Err(MlhError::Schema(format!(
                                "variable {v} out of range u1..u{n}"
                            )));
                        }
                        Ok(Polynomial::var(n, idx - 1))
                    }
                    other => Err(MlhError::Schema(format!("unknown symbol {other:?}"))),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return Err(MlhError::Schema("missing ')'".into()));
                }
                Ok(inner)
            }
            other => Err(MlhError::Schema(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn parse_and_evaluate() {
        let p = Polynomial::parse("u1^2 - 3*u1*u2 + 1/2", 2, 1, 1).unwrap();
        assert_eq!(p.eval(&[2.0, 1.0]), 4.0 - 6.0 + 0.5);
        assert_eq!(p.degree(), 2);
        let s = Polynomial::parse("sigma*u1 + (p - sigma)", 1, 1, 1).unwrap();
        let v = s.eval(&[QuadNum::from_int(1)]);
        assert_eq!(v, QuadNum::from_int(1));
        let d = Polynomial::parse("0.25*u1", 1, 1, 1).unwrap();
        assert_eq!(
            d.eval(&[QuadNum::from_int(1)]),
            QuadNum::rational(rat(1, 4))
        );
    }

    #[test]
    fn symbolic_derivative_matches_hand_result() {
        // d/du1 (u1^3 u2 + 2 u1) = 3 u1^2 u2 + 2
        let p = Polynomial::parse("u1^3*u2 + 2*u1", 2, 1, 1).unwrap();
        let d = p.derivative(0);
        assert_eq!(d, Polynomial::parse("3*u1^2*u2 + 2", 2, 1, 1).unwrap());
        assert!(p.derivative(1).derivative(1).is_zero());
    }

    #[test]
    fn parse_errors() {
        assert!(Polynomial::parse("u3", 2, 1, 1).is_err());
        assert!(Polynomial::parse("u1/u2", 2, 1, 1).is_err());
        assert!(Polynomial::parse("u1 +", 2, 1, 1).is_err());
        assert!(Polynomial::parse("x", 2, 1, 1).is_err());
        assert!(Polynomial::parse("u1^u2", 2, 1, 1).is_err());
    }
}
