//! Short form of the ordinary one-sample expansion over standardized
//! cumulants `lambda_j = kappa_j / sigma^j`.
//!
//! For the plain and Bessel-corrected estimators `A = B sigma^2`, so the
//! statistic is invariant (up to the scale absorbed by `r`) under setting
//! `A = B = sigma^2 = 1`. The corrections then depend on the data only
//! through `lambda_j`, and one set of polynomials in `y = x / r` serves both
//! estimators.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::algebra::rational::{self, Rational};
use crate::algebra::{Monomial, SparsePoly, Symbol, UniPoly};

use super::{build_q, Arity, EngineError, ExpansionSet, StatisticKind};

/// One `content * lambda-monomial * primitive(x)` group of a correction.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaGroup {
    pub content: Rational,
    pub lambda: Monomial,
    /// Integer coefficients, lowest power first, positive leading entry and
    /// unit content.
    pub poly: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaForm {
    q: Vec<UniPoly<SparsePoly>>,
}

/// Rewrites an ordinary one-sample expansion over `lambda_j`.
pub fn lambda_form(es: &ExpansionSet, kind: StatisticKind) -> Result<LambdaForm, EngineError> {
    if !kind.is_ordinary_one_sample() || es.arity() != Arity::OneSample {
        return Err(EngineError::NotOrdinary(format!(
            "the lambda form applies to one-biased and one-unbiased only, not {kind}"
        )));
    }
    let order = es.order();
    let moments = central_moments_in_lambda(order as usize + 2);
    let table = es.k_table().map(|v| {
        let mut out = v.substitute(Symbol::A, &SparsePoly::one())?;
        out = out.substitute(Symbol::Bx, &SparsePoly::one())?;
        for (j, mu) in moments.iter().enumerate().skip(2) {
            out = out.substitute(Symbol::MomentX(j as u8), mu)?;
        }
        Ok(out)
    })?;
    if table.get(2, 1) != SparsePoly::one() {
        return Err(EngineError::Inconsistent("unit variance expected after standardizing".into()));
    }
    let q = build_q(&table)?
        .into_iter()
        .map(|qk| {
            let coeffs = qk
                .power
                .coeffs()
                .iter()
                .map(|c| c.substitute(Symbol::R, &SparsePoly::one()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(UniPoly::new(coeffs))
        })
        .collect::<Result<Vec<_>, EngineError>>()?;
    Ok(LambdaForm { q })
}

/// Central moments `mu_0..mu_max` of a unit-variance law with cumulants
/// `lambda_j`, as polynomials in the `lambda` symbols.
fn central_moments_in_lambda(max: usize) -> Vec<SparsePoly> {
    let kappa = |i: usize| match i {
        1 => SparsePoly::zero(),
        2 => SparsePoly::one(),
        i => SparsePoly::var(Symbol::Lambda(i as u8)),
    };
    let mut mu = vec![SparsePoly::one()];
    for m in 1..=max {
        let mut acc = SparsePoly::zero();
        for i in 1..=m {
            let c = Rational::from_integer(rational::binomial((m - 1) as u32, (i - 1) as u32));
            acc += &(&kappa(i) * &mu[m - i]).scale(&c);
        }
        mu.push(acc);
    }
    mu
}

impl LambdaForm {
    pub fn order(&self) -> u32 {
        self.q.len() as u32
    }

    /// `q_k` as a polynomial in `x` with coefficients over `lambda_j`.
    pub fn q(&self, k: usize) -> Option<&UniPoly<SparsePoly>> {
        self.q.get(k.wrapping_sub(1))
    }

    /// `q_k` split into groups sharing a `lambda` monomial, ordered by
    /// cumulant weight (descending), then number of factors, then highest
    /// cumulant index.
    pub fn groups(&self, k: usize) -> Vec<LambdaGroup> {
        let Some(q) = self.q(k) else {
            return Vec::new();
        };
        let mut by_mono: BTreeMap<Monomial, Vec<Rational>> = BTreeMap::new();
        for (power, c) in q.iter_nonzero() {
            for (mono, coeff) in c.terms() {
                let row = by_mono.entry(mono.clone()).or_insert_with(|| vec![Rational::zero(); q.coeffs().len()]);
                row[power] = coeff.clone();
            }
        }
        let mut groups: Vec<LambdaGroup> = by_mono
            .into_iter()
            .map(|(lambda, row)| {
                let (content, poly) = primitive(&row);
                LambdaGroup { content, lambda, poly }
            })
            .collect();
        groups.sort_by_key(|g| {
            let weight: i32 = g.lambda.factors().iter().map(|&(s, e)| (i32::from(lambda_index(s)) - 2) * e).sum();
            let count: i32 = g.lambda.factors().iter().map(|&(_, e)| e).sum();
            let top = g.lambda.factors().iter().map(|&(s, _)| lambda_index(s)).max().unwrap_or(0);
            (Reverse(weight), count, Reverse(top))
        });
        groups
    }

    /// Text such as `(1/6)*l3*(2*x^2 + 1)`.
    pub fn render(&self, k: usize) -> String {
        let mut out = String::new();
        for (i, g) in self.groups(k).iter().enumerate() {
            let negative = g.content.is_negative();
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            let c = g.content.abs();
            if !c.is_one() {
                factors.push(if c.is_integer() { c.to_string() } else { format!("({c})") });
            }
            if !g.lambda.is_one() {
                factors.push(g.lambda.to_string());
            }
            let poly = render_x(&g.poly);
            if poly != "1" {
                factors.push(format!("({poly})"));
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            out.push_str(&factors.join("*"));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Numeric `q_k(y)` at standardized cumulants `lambda_3, lambda_4, ...`
    /// (as returned by [`MomentSet::lambda`](crate::estimators::MomentSet::lambda)).
    pub fn eval(&self, k: usize, lambda: &[f64], y: f64) -> Result<f64, EngineError> {
        let q = self.q(k).ok_or(EngineError::TermsExceedOrder { terms: k as u32, order: self.order() })?;
        let env = |s: Symbol| match s {
            Symbol::Lambda(j) => (j as usize).checked_sub(3).and_then(|i| lambda.get(i)).copied(),
            _ => None,
        };
        let coeffs = q.coeffs().iter().map(|c| c.eval(env)).collect::<Result<Vec<f64>, _>>()?;
        Ok(UniPoly::new(coeffs).eval(y))
    }

    pub fn to_json(&self) -> Value {
        let q: Vec<Value> = (1..=self.q.len())
            .map(|k| {
                let groups: Vec<Value> = self
                    .groups(k)
                    .iter()
                    .map(|g| {
                        json!({
                            "content": rational::to_ratio_string(&g.content),
                            "lambda": g.lambda.to_string(),
                            "poly": g.poly.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({"k": k, "text": self.render(k), "groups": groups})
            })
            .collect();
        json!({"variable": "x / r", "q": q})
    }
}

fn lambda_index(s: Symbol) -> u8 {
    match s {
        Symbol::Lambda(j) => j,
        _ => 0,
    }
}

/// Splits rational coefficients into signed content and a primitive integer
/// polynomial with positive leading coefficient.
fn primitive(row: &[Rational]) -> (Rational, Vec<BigInt>) {
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for c in row.iter().filter(|c| !c.is_zero()) {
        num_gcd = num_gcd.gcd(c.numer());
        den_lcm = den_lcm.lcm(c.denom());
    }
    let lead_negative = row.iter().rev().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
    let mut content = Rational::new(num_gcd, den_lcm);
    if lead_negative {
        content = -content;
    }
    let poly = row.iter().map(|c| (c / &content).to_integer()).collect();
    (content, poly)
}

fn render_x(poly: &[BigInt]) -> String {
    let mut out = String::new();
    for (power, c) in poly.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let negative = c.is_negative();
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let a = c.abs();
        let var = match power {
            0 => String::new(),
            1 => "x".to_string(),
            p => format!("x^{p}"),
        };
        match (a.is_one(), var.is_empty()) {
            (true, true) => out.push('1'),
            (true, false) => out.push_str(&var),
            (false, true) => out.push_str(&a.to_string()),
            (false, false) => out.push_str(&format!("{a}*{var}")),
        }
    }
    out
}
