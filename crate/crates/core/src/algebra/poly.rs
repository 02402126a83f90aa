use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rational::{self, Rational};
use super::{AlgebraError, Symbol};

/// A product of symbols with nonzero integer exponents, sorted by symbol.
///
/// Exponents of [`Symbol::A`] are counted in halves; all others are plain.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Symbol, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    /// Builds from raw (symbol, stored exponent) pairs, merging duplicates.
    pub fn from_raw(factors: impl IntoIterator<Item = (Symbol, i32)>) -> Self {
        let mut map = BTreeMap::new();
        for (s, e) in factors {
            *map.entry(s).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e != 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Raw (symbol, stored exponent) pairs in canonical order.
    pub fn factors(&self) -> &[(Symbol, i32)] {
        &self.0
    }

    /// Stored exponent of `sym` (halves for `A`), zero when absent.
    pub fn exponent(&self, sym: Symbol) -> i32 {
        self.0.binary_search_by(|(s, _)| s.cmp(&sym)).map(|i| self.0[i].1).unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, e: i32) -> Monomial {
        if e == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(s, x)| (s, x * e)).collect())
    }

    fn without(&self, sym: Symbol) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&(s, _)| s != sym).collect())
    }
}

/// Exact multivariate (Laurent) polynomial over the rationals.
///
/// Zero coefficients are never stored, and iteration follows the canonical
/// monomial order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparsePoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl SparsePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        SparsePoly { terms }
    }

    /// `sym^1`.
    pub fn var(sym: Symbol) -> Self {
        Self::var_pow(sym, 1)
    }

    /// `sym^e` for an integer exponent `e`.
    pub fn var_pow(sym: Symbol, e: i32) -> Self {
        let stored = if sym.half_powers() { 2 * e } else { e };
        Self::term(Rational::one(), Monomial::from_raw([(sym, stored)]))
    }

    /// `A^(halves/2)`.
    pub fn a_pow_halves(halves: i32) -> Self {
        Self::term(Rational::one(), Monomial::from_raw([(Symbol::A, halves)]))
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

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// The rational value if this polynomial is a constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Single-term view, if the polynomial has exactly one term.
    pub fn as_monomial(&self) -> Option<(&Rational, &Monomial)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (c, m))
        } else {
            None
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flat_map(|m| m.factors().iter().map(|&(s, _)| s)).collect()
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        self.terms.keys().any(|m| m.exponent(sym) != 0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero();
        }
        SparsePoly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn mul_monomial(&self, c: &Rational, mono: &Monomial) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero();
        }
        SparsePoly { terms: self.terms.iter().map(|(m, x)| (m.mul(mono), x * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> SparsePoly {
        let mut acc = SparsePoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Renames symbols. The map must be injective on the symbols present and
    /// must not move exponents into or out of half-counted symbols.
    pub fn map_symbols(&self, f: impl Fn(Symbol) -> Symbol) -> SparsePoly {
        let mut out = SparsePoly::zero();
        for (m, c) in &self.terms {
            let m = Monomial::from_raw(m.factors().iter().map(|&(s, e)| (f(s), e)));
            out.add_term(m, c.clone());
        }
        out
    }

    /// Replaces `sym` by the polynomial `value`.
    ///
    /// Negative or half-integer powers of `sym` require `value` to be a single
    /// term whose power is again a term with rational coefficient.
    pub fn substitute(&self, sym: Symbol, value: &SparsePoly) -> Result<SparsePoly, AlgebraError> {
        let mut out = SparsePoly::zero();
        let mut cache: BTreeMap<i32, SparsePoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let stored = m.exponent(sym);
            let rest = m.without(sym);
            let power = match cache.get(&stored) {
                Some(p) => p.clone(),
                None => {
                    let p = power_of(value, sym, stored)?;
                    cache.insert(stored, p.clone());
                    p
                }
            };
            for (pm, pc) in &power.terms {
                out.add_term(rest.mul(pm), c * pc);
            }
        }
        Ok(out)
    }

    /// Floating-point evaluation; every symbol present must be bound.
    pub fn eval(&self, env: impl Fn(Symbol) -> Option<f64>) -> Result<f64, AlgebraError> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut v = rational::to_f64(c);
            for &(s, e) in m.factors() {
                let x = env(s).ok_or(AlgebraError::Unbound(s))?;
                v *= if s.half_powers() {
                    if e % 2 == 0 {
                        x.powi(e / 2)
                    } else {
                        x.powf(f64::from(e) / 2.0)
                    }
                } else {
                    x.powi(e)
                };
            }
            total += v;
        }
        Ok(total)
    }

    /// Exact evaluation. Half powers of `A` need `A` to be a rational square.
    pub fn eval_rational(&self, env: impl Fn(Symbol) -> Option<Rational>) -> Result<Rational, AlgebraError> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for &(s, e) in m.factors() {
                let x = env(s).ok_or(AlgebraError::Unbound(s))?;
                v *= rational_power(&x, s, e)?;
            }
            total += v;
        }
        Ok(total)
    }

    /// Sum over terms of a per-symbol weight times the natural exponent,
    /// returned for each monomial. Used for homogeneity checks.
    pub fn weights(&self, weight: impl Fn(Symbol) -> Rational) -> BTreeSet<Rational> {
        self.terms
            .keys()
            .map(|m| {
                m.factors()
                    .iter()
                    .map(|&(s, e)| {
                        let natural =
                            if s.half_powers() { rational::rat(i64::from(e), 2) } else { rational::int(i64::from(e)) };
                        weight(s) * natural
                    })
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect()
    }
}

fn rational_power(x: &Rational, sym: Symbol, stored: i32) -> Result<Rational, AlgebraError> {
    if sym.half_powers() && stored % 2 != 0 {
        let root = rational::sqrt_exact(x).ok_or(AlgebraError::IrrationalPower(sym))?;
        if root.is_zero() && stored < 0 {
            return Err(AlgebraError::DivisionByZero(sym));
        }
        return Ok(rational::powi(&root, stored));
    }
    let e = if sym.half_powers() { stored / 2 } else { stored };
    if x.is_zero() && e < 0 {
        return Err(AlgebraError::DivisionByZero(sym));
    }
    Ok(rational::powi(x, e))
}

fn power_of(value: &SparsePoly, sym: Symbol, stored: i32) -> Result<SparsePoly, AlgebraError> {
    if stored == 0 {
        return Ok(SparsePoly::one());
    }
    let integral = !sym.half_powers() || stored % 2 == 0;
    let e = if sym.half_powers() { stored / 2 } else { stored };
    if integral && e > 0 {
        return Ok(value.pow(e as u32));
    }
    let (c, m) = value.as_monomial().ok_or(AlgebraError::NonPolynomialSubstitution(sym))?;
    if integral {
        if c.is_zero() {
            return Err(AlgebraError::DivisionByZero(sym));
        }
        return Ok(SparsePoly::term(rational::powi(c, e), m.pow(e)));
    }
    // Half-integer power: needs a rational root of the coefficient and even
    // stored exponents in the replacement.
    let root = rational::sqrt_exact(c).ok_or(AlgebraError::IrrationalPower(sym))?;
    if root.is_zero() && stored < 0 {
        return Err(AlgebraError::DivisionByZero(sym));
    }
    let mut factors = Vec::new();
    for &(s, x) in m.factors() {
        // stored exponents are already in halves for `A`, so the same
        // parity rule covers every symbol
        let total = x * stored;
        if total % 2 != 0 {
            return Err(AlgebraError::NonPolynomialSubstitution(sym));
        }
        factors.push((s, total / 2));
    }
    Ok(SparsePoly::term(rational::powi(&root, stored), Monomial::from_raw(factors)))
}

impl From<Rational> for SparsePoly {
    fn from(c: Rational) -> Self {
        SparsePoly::constant(c)
    }
}

impl From<Symbol> for SparsePoly {
    fn from(s: Symbol) -> Self {
        SparsePoly::var(s)
    }
}

impl Add<&SparsePoly> for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for SparsePoly {
    type Output = SparsePoly;
    fn add(mut self, rhs: SparsePoly) -> SparsePoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&SparsePoly> for SparsePoly {
    fn add_assign(&mut self, rhs: &SparsePoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        SparsePoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for SparsePoly {
    type Output = SparsePoly;
    fn neg(mut self) -> SparsePoly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Sub<&SparsePoly> for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Sub for SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: SparsePoly) -> SparsePoly {
        &self - &rhs
    }
}

impl Mul<&SparsePoly> for &SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero();
        if self.is_zero() || rhs.is_zero() {
            return out;
        }
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: SparsePoly) -> SparsePoly {
        &self * &rhs
    }
}

impl PartialEq<Rational> for SparsePoly {
    fn eq(&self, other: &Rational) -> bool {
        self.as_constant().as_ref() == Some(other)
    }
}
