//! Exact sparse multivariate polynomials over the rationals.
//!
//! Coefficients are kept as reduced [`BigRational`]s so zero tests stay exact;
//! floating values only appear at evaluation time through [`CompiledPoly`].

mod parse;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::WeightSystem;

pub use parse::parse_poly;

pub type Rational = BigRational;

/// Weighted order: a natural number or the order of the zero polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WOrder {
    Finite(u64),
    Infinite,
}

impl WOrder {
    pub fn finite(self) -> Option<u64> {
        match self {
            WOrder::Finite(v) => Some(v),
            WOrder::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, WOrder::Infinite)
    }
}

impl fmt::Display for WOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WOrder::Finite(v) => write!(f, "{v}"),
            WOrder::Infinite => write!(f, "inf"),
        }
    }
}

impl std::ops::Add for WOrder {
    type Output = WOrder;
    fn add(self, rhs: WOrder) -> WOrder {
        match (self, rhs) {
            (WOrder::Finite(a), WOrder::Finite(b)) => WOrder::Finite(a + b),
            _ => WOrder::Infinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn weighted_degree(&self, omega: &[u32]) -> u64 {
        self.0.iter().zip(omega).map(|(&e, &w)| e as u64 * w as u64).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Sparse polynomial in `nvars` variables with exact rational coefficients.
///
/// The term map never stores a zero coefficient, so the zero polynomial is the
/// empty map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WPolynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl WPolynomial {
    pub fn zero(nvars: usize) -> Self {
        WPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), Rational::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_nvars(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch { left: self.nvars, right: other.nvars });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_nvars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_nvars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_nvars(other)?;
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(self.nvars);
        }
        WPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.nvars, Rational::one());
        for _ in 0..e {
            acc = acc.mul(self).expect("same nvars");
        }
        acc
    }

    /// Partial derivative with respect to variable `i` (0-based).
    pub fn diff(&self, i: usize) -> Result<Self> {
        if i >= self.nvars {
            return Err(Error::IndexOutOfRange { index: i, nvars: self.nvars });
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[i] -= 1;
            out.add_term(dm, c * Rational::from_integer(BigInt::from(e)));
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: point.len() });
        }
        Ok(self.compile().eval(point))
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: point.len() });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    term *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Minimal weighted degree over stored monomials; `Infinite` for zero.
    pub fn word(&self, ws: &WeightSystem) -> WOrder {
        self.terms
            .keys()
            .map(|m| m.weighted_degree(ws.omega()))
            .min()
            .map_or(WOrder::Infinite, WOrder::Finite)
    }

    /// `(true, d)` iff every monomial has weighted degree `d`.
    pub fn weighted_homogeneity(&self, ws: &WeightSystem) -> (bool, WOrder) {
        let mut degrees = self.terms.keys().map(|m| m.weighted_degree(ws.omega()));
        match degrees.next() {
            None => (true, WOrder::Infinite),
            Some(d) => {
                if degrees.all(|e| e == d) {
                    (true, WOrder::Finite(d))
                } else {
                    (false, WOrder::Finite(d.min(self.word(ws).finite().unwrap_or(d))))
                }
            }
        }
    }

    pub fn is_weighted_homogeneous(&self, ws: &WeightSystem) -> bool {
        self.weighted_homogeneity(ws).0
    }

    /// Lowest total degree of a monomial; `None` for the zero polynomial.
    pub fn min_total_degree(&self) -> Option<u64> {
        self.terms.keys().map(Monomial::total_degree).min()
    }

    pub fn max_exponent(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.0.clone(), c.to_f64().unwrap_or(f64::NAN)))
                .collect(),
        }
    }

    /// Render in the parser grammar with the given variable names.
    pub fn to_text(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let factors: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
                .collect();
            let coeff_text = if a.is_integer() { a.numer().to_string() } else { format!("{}/{}", a.numer(), a.denom()) };
            if factors.is_empty() {
                out.push_str(&coeff_text);
            } else {
                if !a.is_one() {
                    out.push_str(&coeff_text);
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

/// Floating-point snapshot of a polynomial for hot evaluation loops.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl CompiledPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_exponent(&self, i: usize) -> u32 {
        self.terms.iter().map(|(e, _)| e[i]).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().zip(x).fold(*c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) })
            })
            .sum()
    }

    /// Sum of absolute monomial values; the scale against which cancellation
    /// in [`CompiledPoly::eval`] is judged.
    pub fn eval_abs(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().zip(x).fold(c.abs(), |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.abs().powi(k as i32) })
            })
            .sum()
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn ws(w: &[u32]) -> WeightSystem {
        WeightSystem::new(w).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let xy = names(&["x", "y"]);
        let a = parse_poly("x + y", &xy).unwrap();
        let b = parse_poly("x - y", &xy).unwrap();
        assert_eq!(a.add(&b).unwrap(), parse_poly("2*x", &xy).unwrap());
        assert_eq!(b.mul(&a).unwrap(), parse_poly("x^2 - y^2", &xy).unwrap());
        let z = parse_poly("x^2", &xy).unwrap().scale(&Rational::zero());
        assert!(z.is_zero());
        assert!(z.terms().is_empty());
        let three = parse_poly("x", &names(&["x", "y", "z"])).unwrap();
        assert!(matches!(a.add(&three), Err(Error::NvarsMismatch { .. })));
    }

    #[test]
    fn derivative_examples() {
        let xy = names(&["x", "y"]);
        let p = parse_poly("x^2 - y^2", &xy).unwrap();
        assert_eq!(p.diff(0).unwrap(), parse_poly("2*x", &xy).unwrap());
        let xyz = names(&["x", "y", "z"]);
        let bs = parse_poly("z^5 + x^15 + x*y^7", &xyz).unwrap();
        // term-by-term: d/dx z^5 = 0, d/dx x^15 = 15 x^14, d/dx x y^7 = y^7
        let expected = WPolynomial::from_terms(
            3,
            [(vec![14, 0, 0], rational(15, 1)), (vec![0, 7, 0], rational(1, 1))],
        )
        .unwrap();
        assert_eq!(bs.diff(0).unwrap(), expected);
        let c = parse_poly("7", &xyz).unwrap();
        assert!(c.diff(2).unwrap().is_zero());
        assert!(matches!(c.diff(3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn evaluation_examples() {
        let xy = names(&["x", "y"]);
        let p = parse_poly("x^2 - y^2", &xy).unwrap();
        assert_eq!(p.eval(&[1.0, 0.0]).unwrap(), 1.0);
        let bs = parse_poly("z^5 + x^15 + x*y^7", &names(&["x", "y", "z"])).unwrap();
        assert_eq!(bs.eval(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        let circle = parse_poly("x^2 + y^2", &xy).unwrap();
        assert_eq!(circle.eval_exact(&[rational(3, 5), rational(4, 5)]).unwrap(), rational(1, 1));
        assert!(matches!(p.eval(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weighted_order_examples() {
        let xyz = names(&["x", "y", "z"]);
        let w = ws(&[1, 2, 3]);
        assert_eq!(parse_poly("z^5", &xyz).unwrap().word(&w), WOrder::Finite(15));
        assert_eq!(parse_poly("x*y^7", &xyz).unwrap().word(&w), WOrder::Finite(15));
        assert_eq!(WPolynomial::zero(3).word(&w), WOrder::Infinite);

        let bs = parse_poly("z^5 + x^15 + x*y^7", &xyz).unwrap();
        assert_eq!(bs.weighted_homogeneity(&w), (true, WOrder::Finite(15)));
        let xy = names(&["x", "y"]);
        assert!(!parse_poly("x^2 + y^3", &xy).unwrap().is_weighted_homogeneous(&ws(&[1, 1])));
        let yx = names(&["y", "x"]);
        assert_eq!(
            parse_poly("y^3 + x^2", &yx).unwrap().weighted_homogeneity(&ws(&[2, 3])),
            (true, WOrder::Finite(6))
        );
        assert_eq!(WPolynomial::zero(2).weighted_homogeneity(&ws(&[1, 1])), (true, WOrder::Infinite));
    }

    #[test]
    fn text_round_trip() {
        let xyz = names(&["x", "y", "z"]);
        let p = parse_poly("-3/4*x^2*y + z^5 - 2 + x*y^7", &xyz).unwrap();
        let text = p.to_text(&xyz);
        assert_eq!(parse_poly(&text, &xyz).unwrap(), p);
    }
}
