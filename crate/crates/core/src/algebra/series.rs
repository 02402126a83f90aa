use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::rational::{self, Rational};
use super::{AlgebraError, SparsePoly};

/// Exact ring operations needed by truncated series and univariate
/// polynomials.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: &Rational) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rational::int(-1)))
    }
}

impl Coeff for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: &Rational) -> Self {
        self * c
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

impl Coeff for SparsePoly {
    fn zero() -> Self {
        SparsePoly::zero()
    }
    fn one() -> Self {
        SparsePoly::one()
    }
    fn is_zero(&self) -> bool {
        SparsePoly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: &Rational) -> Self {
        SparsePoly::scale(self, c)
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

/// Polynomial in one formal variable, lowest power first, trailing zeros
/// trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> UniPoly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(Coeff::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn monomial(c: C, power: usize) -> Self {
        let mut coeffs = vec![C::zero(); power];
        coeffs.push(c);
        Self::new(coeffs)
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> C {
        self.coeffs.get(power).cloned().unwrap_or_else(C::zero)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> UniPoly<D> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = (usize, &C)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }
}

impl<C: Coeff> Coeff for UniPoly<C> {
    fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }
    fn one() -> Self {
        UniPoly::new(vec![C::one()])
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect())
    }
    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.iter_nonzero() {
            for (j, b) in other.iter_nonzero() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        UniPoly::new(out)
    }
    fn scale(&self, c: &Rational) -> Self {
        UniPoly::new(self.coeffs.iter().map(|x| x.scale(c)).collect())
    }
}

impl UniPoly<Rational> {
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + rational::to_f64(c))
    }
}

impl UniPoly<f64> {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: &Rational) -> Self {
        self * rational::to_f64(c)
    }
}

/// Truncated formal series `sum_p coeff_p * n^(-p/2)` with `p <= cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfPowerSeries<C> {
    terms: BTreeMap<i32, C>,
    cap: i32,
}

impl<C: Coeff> HalfPowerSeries<C> {
    pub fn zero(cap: i32) -> Self {
        HalfPowerSeries { terms: BTreeMap::new(), cap }
    }

    pub fn one(cap: i32) -> Self {
        Self::single(0, C::one(), cap)
    }

    /// `c * n^(-p/2)`, or zero when `p` exceeds the cap.
    pub fn single(p: i32, c: C, cap: i32) -> Self {
        let mut s = Self::zero(cap);
        s.add_at(p, c);
        s
    }

    pub fn cap(&self) -> i32 {
        self.cap
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `n^(-p/2)`.
    pub fn coeff(&self, p: i32) -> C {
        self.terms.get(&p).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &C)> {
        self.terms.iter().map(|(p, c)| (*p, c))
    }

    pub fn min_power(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    /// Accumulates `c * n^(-p/2)`; terms beyond the cap are discarded.
    pub fn add_at(&mut self, p: i32, c: C) {
        if p > self.cap || c.is_zero() {
            return;
        }
        let slot = self.terms.entry(p).or_insert_with(C::zero);
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> HalfPowerSeries<D> {
        let mut out = HalfPowerSeries::zero(self.cap);
        for (&p, c) in &self.terms {
            out.add_at(p, f(c));
        }
        out
    }

    /// Same series under a different cap, dropping terms beyond it.
    pub fn with_cap(&self, cap: i32) -> Self {
        let mut out = Self::zero(cap);
        for (&p, c) in &self.terms {
            out.add_at(p, c.clone());
        }
        out
    }

    fn check_cap(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.cap == other.cap {
            Ok(())
        } else {
            Err(AlgebraError::CapMismatch(self.cap, other.cap))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_cap(other)?;
        let mut out = self.clone();
        for (&p, c) in &other.terms {
            out.add_at(p, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(&rational::int(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|x| x.scale(c))
    }

    /// Multiplies every coefficient by the same ring element.
    pub fn mul_coeff(&self, c: &C) -> Self {
        self.map(|x| x.mul(c))
    }

    /// Multiplies by `n^(-shift/2)`.
    pub fn shift(&self, shift: i32) -> Self {
        let mut out = Self::zero(self.cap);
        for (&p, c) in &self.terms {
            out.add_at(p + shift, c.clone());
        }
        out
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_cap(other)?;
        let mut out = Self::zero(self.cap);
        for (&p, a) in &self.terms {
            for (&q, b) in &other.terms {
                if p + q <= self.cap {
                    out.add_at(p + q, a.mul(b));
                }
            }
        }
        Ok(out)
    }

    /// `exp(self)`; requires every term to carry a strictly positive power.
    pub fn exp(&self) -> Result<Self, AlgebraError> {
        if let Some(p) = self.min_power() {
            if p <= 0 {
                return Err(AlgebraError::ExpConstantTerm(p));
            }
        }
        let mut total = Self::one(self.cap);
        let mut power = Self::one(self.cap);
        let mut m = 1i64;
        loop {
            power = power.mul(self)?.scale(&rational::rat(1, m));
            if power.is_zero() {
                return Ok(total);
            }
            total = total.add(&power)?;
            m += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{int, rat};
    use crate::algebra::Symbol;

    fn mu3() -> SparsePoly {
        SparsePoly::var(Symbol::MomentX(3))
    }

    #[test]
    fn conjugate_product() {
        let mut a = HalfPowerSeries::one(2);
        a.add_at(1, mu3());
        let mut b = HalfPowerSeries::one(2);
        b.add_at(1, -mu3());
        let prod = a.mul(&b).unwrap();
        let mut want = HalfPowerSeries::one(2);
        want.add_at(2, -mu3().pow(2));
        assert_eq!(prod, want);
    }

    #[test]
    fn truncation_drops_high_powers() {
        let a = HalfPowerSeries::single(3, mu3(), 4);
        let b = HalfPowerSeries::single(2, mu3(), 4);
        assert!(a.mul(&b).unwrap().is_zero());
        assert!(HalfPowerSeries::single(5, mu3(), 4).is_zero());
    }

    #[test]
    fn geometric_square() {
        let mut s = HalfPowerSeries::zero(4);
        for p in 0..=4 {
            s.add_at(p, int(1));
        }
        let sq = s.mul(&s).unwrap();
        // Convolution by hand: p+1 ways to split p into two parts.
        for p in 0..=4 {
            assert_eq!(sq.coeff(p), int(i64::from(p) + 1));
        }
    }

    #[test]
    fn mismatched_caps() {
        let a = HalfPowerSeries::<Rational>::one(2);
        let b = HalfPowerSeries::<Rational>::one(3);
        assert_eq!(a.mul(&b), Err(AlgebraError::CapMismatch(2, 3)));
    }

    #[test]
    fn exp_of_zero_and_linear() {
        let z = HalfPowerSeries::<UniPoly<SparsePoly>>::zero(3);
        assert_eq!(z.exp().unwrap(), HalfPowerSeries::one(3));

        // exp(n^(-1/2) c u), cap 2 -> 1 + n^(-1/2) c u + n^(-1) c^2 u^2 / 2.
        let c = SparsePoly::var(Symbol::Cumulant(1, 2));
        let s = HalfPowerSeries::single(1, UniPoly::monomial(c.clone(), 1), 2);
        let e = s.exp().unwrap();
        assert_eq!(e.coeff(0), UniPoly::one());
        assert_eq!(e.coeff(1), UniPoly::monomial(c.clone(), 1));
        assert_eq!(e.coeff(2), UniPoly::monomial(c.pow(2).scale(&rat(1, 2)), 2));
        assert!(e.coeff(3).is_zero());
    }

    #[test]
    fn exp_rejects_constant_term() {
        let s = HalfPowerSeries::single(0, int(1), 3);
        assert_eq!(s.exp(), Err(AlgebraError::ExpConstantTerm(0)));
    }
}
