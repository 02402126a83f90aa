//! Exact-arithmetic kernel: sparse multivariate polynomials over the
//! rationals, truncated series in `n^(-1/2)`, Hermite polynomials and
//! moment/cumulant conversion.

mod cumulants;
mod hermite;
mod poly;
pub mod rational;
mod series;
mod symbol;
mod text;

pub use cumulants::{
    central_moments_to_cumulants, cumulants_to_central_moments, cumulants_to_moments, moments_to_cumulants,
};
pub use hermite::{hermite, hermite_table};
pub use poly::{Monomial, SparsePoly};
pub use rational::Rational;
pub use series::{Coeff, HalfPowerSeries, UniPoly};
pub use symbol::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("no numeric binding for symbol `{0}`")]
    Unbound(Symbol),
    #[error("series caps differ ({0} vs {1})")]
    CapMismatch(i32, i32),
    #[error("exponential of a series with a term at power n^(-{0}/2); the exponent must start at p >= 1")]
    ExpConstantTerm(i32),
    #[error("substituting `{0}` would leave the polynomial ring")]
    NonPolynomialSubstitution(Symbol),
    #[error("half-integer power of `{0}` is irrational at this binding")]
    IrrationalPower(Symbol),
    #[error("negative power of `{0}` bound to zero")]
    DivisionByZero(Symbol),
    #[error("parse error: {0}")]
    Parse(String),
}
