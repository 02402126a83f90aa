//! Canonical text rendering of [`SparsePoly`] and a parser that reads it back.
//!
//! Syntax: `-(3/2)*mu_x[3]^2*A^(-3/2) + B_x`. The parser also accepts
//! parentheses, `/` by a single term, and `^(p/2)` on single terms.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::poly::{Monomial, SparsePoly};
use super::rational::{self, Rational};
use super::{AlgebraError, Symbol};

pub(crate) fn fmt_exponent(f: &mut impl fmt::Write, sym: Symbol, stored: i32) -> fmt::Result {
    if sym.half_powers() && stored % 2 != 0 {
        return write!(f, "^({}/2)", stored);
    }
    let e = if sym.half_powers() { stored / 2 } else { stored };
    match e {
        1 => Ok(()),
        e if e < 0 => write!(f, "^({e})"),
        e => write!(f, "^{e}"),
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (i, &(s, e)) in self.factors().iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{s}")?;
            fmt_exponent(f, s, e)?;
        }
        Ok(())
    }
}

/// Renders a nonnegative coefficient: `3` or `(3/2)`.
pub(crate) fn fmt_coefficient(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("({}/{})", c.numer(), c.denom())
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            if m.is_one() {
                f.write_str(&fmt_coefficient(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_coefficient(&abs))?;
            }
        }
        Ok(())
    }
}

impl FromStr for SparsePoly {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> AlgebraError {
        AlgebraError::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<SparsePoly, AlgebraError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc += &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SparsePoly, AlgebraError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.unary()?;
            } else if self.eat(b'/') {
                let d = self.unary()?;
                let (c, m) = d.as_monomial().ok_or_else(|| self.error("division by a non-monomial"))?;
                acc = acc.mul_monomial(&c.recip(), &m.pow(-1));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<SparsePoly, AlgebraError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let halves = self.exponent_halves()?;
            return power_halves(&base, halves).map_err(|_| self.error("unsupported power"));
        }
        Ok(base)
    }

    /// Exponent as a count of halves: `2`, `(-1)`, `(3/2)`, `(-3/2)`.
    fn exponent_halves(&mut self) -> Result<i32, AlgebraError> {
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        let n = self.integer()?;
        let n = i32::try_from(n).map_err(|_| self.error("exponent too large"))?;
        let mut halves = 2 * n;
        if paren {
            if self.eat(b'/') {
                if self.integer()? != BigInt::from(2) {
                    return Err(self.error("only halves are supported in exponents"));
                }
                halves = n;
            }
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
        }
        Ok(if neg { -halves } else { halves })
    }

    fn integer(&mut self) -> Result<BigInt, AlgebraError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse().map_err(|_| self.error("bad integer"))
    }

    fn atom(&mut self) -> Result<SparsePoly, AlgebraError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => Ok(SparsePoly::constant(Rational::from_integer(self.integer()?))),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                if self.src.get(self.pos) == Some(&b'[') {
                    while self.pos < self.src.len() && self.src[self.pos] != b']' {
                        self.pos += 1;
                    }
                    self.pos += 1;
                }
                let end = self.pos.min(self.src.len());
                let name = std::str::from_utf8(&self.src[start..end]).expect("ascii");
                let sym = Symbol::parse(name).ok_or_else(|| AlgebraError::Parse(format!("unknown symbol `{name}`")))?;
                Ok(SparsePoly::var(sym))
            }
            _ => Err(self.error("expected a number, symbol or `(`")),
        }
    }
}

/// `p^(halves/2)`; non-integral or negative powers need a single term.
fn power_halves(p: &SparsePoly, halves: i32) -> Result<SparsePoly, AlgebraError> {
    if halves >= 0 && halves % 2 == 0 {
        return Ok(p.pow((halves / 2) as u32));
    }
    let (c, m) = p.as_monomial().ok_or(AlgebraError::NonPolynomialSubstitution(Symbol::A))?;
    if halves % 2 == 0 {
        return Ok(SparsePoly::term(rational::powi(c, halves / 2), m.pow(halves / 2)));
    }
    let root = rational::sqrt_exact(c).ok_or(AlgebraError::IrrationalPower(Symbol::A))?;
    let mut factors = Vec::new();
    for &(s, e) in m.factors() {
        let total = e * halves;
        if total % 2 != 0 {
            return Err(AlgebraError::NonPolynomialSubstitution(s));
        }
        factors.push((s, total / 2));
    }
    Ok(SparsePoly::term(rational::powi(&root, halves), Monomial::from_raw(factors)))
}
