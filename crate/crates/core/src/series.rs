//! Truncated power series in the radial parameter `t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::CompiledPoly;

pub const DEFAULT_TRUNC: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-9;

/// `Σ_{m=0}^{K} c_m t^m`, known modulo `t^{K+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TSeries {
    coeffs: Vec<f64>,
}

/// Binary ring operations on series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
}

impl TSeries {
    pub fn zero(trunc: usize) -> Self {
        TSeries { coeffs: vec![0.0; trunc + 1] }
    }

    pub fn constant(c: f64, trunc: usize) -> Self {
        let mut s = Self::zero(trunc);
        s.coeffs[0] = c;
        s
    }

    /// `c·t^m`, zero if `m > trunc`.
    pub fn monomial(c: f64, m: usize, trunc: usize) -> Self {
        let mut s = Self::zero(trunc);
        if m <= trunc {
            s.coeffs[m] = c;
        }
        s
    }

    /// Coefficients `c_0..=c_K`. Panics on an empty vector.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant coefficient");
        TSeries { coeffs }
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize) -> f64 {
        self.coeffs.get(m).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, m: usize, v: f64) {
        if m < self.coeffs.len() {
            self.coeffs[m] = v;
        }
    }

    pub fn truncate(&self, trunc: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(trunc + 1, 0.0);
        TSeries { coeffs: c }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn arith(&self, other: &Self, op: SeriesOp) -> Self {
        let k = self.trunc().min(other.trunc());
        let coeffs = match op {
            SeriesOp::Add => (0..=k).map(|m| self.coeffs[m] + other.coeffs[m]).collect(),
            SeriesOp::Sub => (0..=k).map(|m| self.coeffs[m] - other.coeffs[m]).collect(),
            SeriesOp::Mul => {
                let mut out = vec![0.0; k + 1];
                for (i, &a) in self.coeffs[..=k].iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for (j, &b) in other.coeffs[..=k - i].iter().enumerate() {
                        out[i + j] += a * b;
                    }
                }
                out
            }
        };
        TSeries { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.arith(other, SeriesOp::Add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.arith(other, SeriesOp::Sub)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.arith(other, SeriesOp::Mul)
    }

    pub fn scale(&self, r: f64) -> Self {
        TSeries { coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, r: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += r * b;
        }
    }

    /// Multiply by `t^m`. A negative `m` requires the dropped coefficients to
    /// vanish within the absolute tolerance `tol` and shortens the truncation by `|m|`.
    pub fn shift(&self, m: isize, tol: f64) -> Result<Self> {
        if m >= 0 {
            let m = m as usize;
            let k = self.trunc();
            let mut out = vec![0.0; k + 1];
            for i in 0..=k.saturating_sub(m) {
                if i + m <= k {
                    out[i + m] = self.coeffs[i];
                }
            }
            return Ok(TSeries { coeffs: out });
        }
        let d = m.unsigned_abs();
        for i in 0..d.min(self.coeffs.len()) {
            if self.coeffs[i].abs() > tol {
                return Err(Error::NonVanishingLeadingCoefficients { index: i, value: self.coeffs[i], shift: d });
            }
        }
        if d > self.trunc() {
            // nothing of the series survives the shift
            return Err(Error::NonVanishingLeadingCoefficients { index: self.trunc(), value: 0.0, shift: d });
        }
        Ok(TSeries { coeffs: self.coeffs[d..].to_vec() })
    }

    /// Least `m` with `|c_m| > tol·max(1, max|c|)`; `None` means beyond the truncation.
    pub fn ord(&self, tol: f64) -> Option<usize> {
        self.ord_scaled(tol, self.max_abs())
    }

    /// Like [`TSeries::ord`] with an explicit magnitude scale.
    pub fn ord_scaled(&self, tol: f64, scale: f64) -> Option<usize> {
        let thr = tol * scale.max(1.0);
        self.coeffs.iter().position(|c| c.abs() > thr)
    }

    /// Quotient `a / b` after cancelling the common power of `t`.
    pub fn div(&self, b: &Self, tol: f64) -> Result<Self> {
        let ob = b.ord(tol).ok_or(Error::DegenerateDenominator)?;
        if let Some(oa) = self.ord(tol) {
            if oa < ob {
                return Err(Error::DegenerateDenominator);
            }
        }
        let k = self.trunc().min(b.trunc()) - ob;
        let num = &self.coeffs[ob..];
        let den = &b.coeffs[ob..];
        let b0 = den[0];
        let mut q = vec![0.0; k + 1];
        for m in 0..=k {
            let mut acc = num[m];
            for j in 1..=m {
                acc -= den[j] * q[m - j];
            }
            q[m] = acc / b0;
        }
        Ok(TSeries { coeffs: q })
    }

    /// `self^alpha` for a series with positive constant term.
    pub fn powf(&self, alpha: f64) -> Result<Self> {
        let b0 = self.coeffs[0];
        if b0 <= 0.0 {
            return Err(Error::DegenerateDenominator);
        }
        let k = self.trunc();
        let mut y = vec![0.0; k + 1];
        y[0] = b0.powf(alpha);
        // from y'·b = alpha·b'·y
        for n in 1..=k {
            let mut acc = 0.0;
            for j in 1..=n {
                acc += (alpha * j as f64 - (n - j) as f64) * self.coeffs[j] * y[n - j];
            }
            y[n] = acc / (n as f64 * b0);
        }
        Ok(TSeries { coeffs: y })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = TSeries::constant(1.0, self.trunc());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let k = self.trunc();
        if k == 0 {
            return TSeries::zero(0);
        }
        TSeries { coeffs: (1..=k).map(|m| m as f64 * self.coeffs[m]).collect() }
    }

    /// Value of the truncated polynomial at `t` (Horner).
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// `Σ c_m (t·w(t))^m`: substitute a reparametrization of the variable.
    pub fn compose_scaled_arg(&self, w: &Self) -> Self {
        let k = self.trunc().min(w.trunc());
        let mut out = TSeries::zero(k);
        let tw = w.truncate(k).shift(1, 0.0).expect("positive shift");
        let mut power = TSeries::constant(1.0, k);
        for m in 0..=k {
            out.add_assign_scaled(&power, self.coeffs[m]);
            power = power.mul(&tw);
        }
        out
    }
}

/// Compose a polynomial with series arguments, truncating at the common order.
pub fn compose_poly(p: &CompiledPoly, args: &[TSeries]) -> TSeries {
    assert_eq!(p.nvars(), args.len(), "argument count must match variable count");
    let k = args.iter().map(TSeries::trunc).min().unwrap_or(0);
    let mut out = TSeries::zero(k);
    if p.is_zero() {
        return out;
    }
    let powers: Vec<Vec<TSeries>> = args
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let a = a.truncate(k);
            let mut pw = vec![TSeries::constant(1.0, k)];
            for _ in 0..p.max_exponent(i) {
                let next = pw.last().unwrap().mul(&a);
                pw.push(next);
            }
            pw
        })
        .collect();
    for (e, c) in p.terms() {
        let mut term = TSeries::constant(*c, k);
        for (i, &ei) in e.iter().enumerate() {
            if ei > 0 {
                term = term.mul(&powers[i][ei as usize]);
            }
        }
        out.add_assign_scaled(&term, 1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn s(c: &[f64]) -> TSeries {
        TSeries::from_coeffs(c.to_vec())
    }

    #[test]
    fn arithmetic_examples() {
        let a = s(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        let b = s(&[1.0, -1.0, 0.0, 0.0, 0.0]);
        assert_eq!(a.mul(&b), s(&[1.0, 0.0, -1.0, 0.0, 0.0]));
        assert_eq!(a.add(&s(&[1.0, 2.0])).trunc(), 1);
        assert!(s(&[0.0, 1.0]).scale(0.0).is_exact_zero());
    }

    #[test]
    fn shift_examples() {
        let a = s(&[0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(a.shift(-3, 1e-12).unwrap(), s(&[1.0, 1.0]));
        assert!(matches!(
            s(&[1.0, 1.0]).shift(-1, 1e-12),
            Err(Error::NonVanishingLeadingCoefficients { index: 0, .. })
        ));
        // y^3 at s = (1/√2, 1/√2), ω = (1, 1): (t s₂)³ shifted by -(p+δ) = -3
        let names = vec!["x".to_string(), "y".to_string()];
        let y3 = parse_poly("y^3", &names).unwrap().compile();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let args = [TSeries::monomial(r, 1, 6), TSeries::monomial(r, 1, 6)];
        let g = compose_poly(&y3, &args).shift(-3, 1e-12).unwrap();
        assert!((g.coeff(0) - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert_eq!(g.trunc(), 3);
        assert_eq!(a.shift(2, 0.0).unwrap(), s(&[0.0, 0.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn composition_examples() {
        let names = vec!["x".to_string(), "y".to_string()];
        let p = parse_poly("x^2 - y^2", &names).unwrap().compile();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let g1 = s(&[0.0, r, -0.125, 0.0]);
        let g2 = s(&[0.0, r, 0.125, 0.0]);
        // brute expansion: (a-b)(a+b) with a-b = -t²/4, a+b = √2 t gives -√2/4 t³
        let c = compose_poly(&p, &[g1.clone(), g2.clone()]);
        let a_minus_b = g1.sub(&g2);
        let a_plus_b = g1.add(&g2);
        let brute = a_minus_b.mul(&a_plus_b);
        for m in 0..=3 {
            assert!((c.coeff(m) - brute.coeff(m)).abs() < 1e-15);
        }
        assert!((c.coeff(3) + std::f64::consts::SQRT_2 / 4.0).abs() < 1e-15);
        assert_eq!(c.coeff(0), 0.0);

        let five = parse_poly("5", &names).unwrap().compile();
        assert_eq!(compose_poly(&five, &[g1.clone(), g2.clone()]), TSeries::constant(5.0, 3));
        let x = parse_poly("x", &names).unwrap().compile();
        assert_eq!(compose_poly(&x, &[g1.clone(), g2]), g1);
    }

    #[test]
    fn order_examples() {
        assert_eq!(s(&[0.0, 0.0, 0.0, 1.0, 1.0]).ord(1e-12), Some(3));
        assert_eq!(TSeries::zero(5).ord(1e-12), None);
    }

    #[test]
    fn division_examples() {
        let a = s(&[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(a.div(&a, 1e-12).unwrap(), s(&[1.0, 0.0, 0.0, 0.0]));
        let num = s(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let den = s(&[0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(num.div(&den, 1e-12).unwrap(), s(&[1.0, -1.0, 1.0, -1.0]));
        assert!(matches!(a.div(&TSeries::zero(3), 1e-12), Err(Error::DegenerateDenominator)));
        assert!(matches!(s(&[1.0, 0.0]).div(&s(&[0.0, 1.0]), 1e-12), Err(Error::DegenerateDenominator)));
    }

    #[test]
    fn real_power_matches_repeated_product() {
        let b = s(&[1.0, 0.3, -0.2, 0.1, 0.05]);
        let cube_root = b.powf(1.0 / 3.0).unwrap();
        let back = cube_root.pow(3);
        for m in 0..=4 {
            assert!((back.coeff(m) - b.coeff(m)).abs() < 1e-14);
        }
        let inv = b.powf(-1.0).unwrap();
        let one = inv.mul(&b);
        assert!((one.coeff(0) - 1.0).abs() < 1e-15);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn reparametrized_argument() {
        // f(t) = t + t², w = 1 + t: f(t(1+t)) = t + t² + (t + t²)² = t + 2t² + 2t³ + t⁴
        let f = s(&[0.0, 1.0, 1.0, 0.0, 0.0]);
        let w = s(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.compose_scaled_arg(&w), s(&[0.0, 1.0, 2.0, 2.0, 1.0]));
    }
}
