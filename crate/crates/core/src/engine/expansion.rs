use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::algebra::rational::{self, Rational};
use crate::algebra::{hermite_table, HalfPowerSeries, SparsePoly, Symbol, UniPoly};
use crate::dist::{normal_cdf, normal_pdf};

use super::{k_power, Arity, EngineError, KTable};

/// One correction polynomial `q_k(x; r)` in `y = x / r`, held in both the
/// Hermite basis and the power basis. Coefficients are polynomials in the
/// formal `k[j,l]` symbols and `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct QPolynomial {
    /// `hermite[d]` multiplies `He_d(y)`.
    pub hermite: Vec<SparsePoly>,
    pub power: UniPoly<SparsePoly>,
}

impl QPolynomial {
    fn from_hermite(hermite: Vec<SparsePoly>) -> Self {
        let table = hermite_table(hermite.len());
        let mut coeffs = vec![SparsePoly::zero(); hermite.len()];
        for (d, h) in hermite.iter().enumerate() {
            if h.is_zero() {
                continue;
            }
            for (power, c) in table[d].iter_nonzero() {
                coeffs[power] += &h.scale(c);
            }
        }
        QPolynomial { hermite, power: UniPoly::new(coeffs) }
    }

    pub fn is_zero(&self) -> bool {
        self.hermite.iter().all(SparsePoly::is_zero)
    }

    fn substitute_all(&self, f: &impl Fn(&SparsePoly) -> Result<SparsePoly, EngineError>) -> Result<Self, EngineError> {
        let hermite = self.hermite.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Ok(QPolynomial::from_hermite(hermite))
    }
}

/// Builds `q_1..q_K` from a table of sampling-cumulant coefficients.
///
/// Forms `S(u) = sum n^(-p/2) k_{j,l} u^j / j!` over all entries except the
/// leading variance `k_{2,1}`, expands `exp(S)` through `n^(-K/2)` and maps
/// each term `c u^m` of the `n^(-k/2)` coefficient to `-c r^(-m) He_{m-1}(y)`.
pub fn build_q(table: &KTable) -> Result<Vec<QPolynomial>, EngineError> {
    let order = table.order() as i32;
    let mut s: HalfPowerSeries<UniPoly<SparsePoly>> = HalfPowerSeries::zero(order);
    for ((j, l), value) in table.entries() {
        if (j, l) == (2, 1) {
            continue;
        }
        let p = k_power(j, l);
        if p < 1 {
            return Err(EngineError::Inconsistent(format!("k[{j},{l}] sits at n^(-{p}/2)")));
        }
        let inv_fact = Rational::new(1.into(), rational::factorial(u32::from(j)));
        s.add_at(p, UniPoly::monomial(value.scale(&inv_fact), j as usize));
    }
    let e = s.exp()?;
    let mut out = Vec::with_capacity(order.max(0) as usize);
    for k in 1..=order {
        let pk = e.coeff(k);
        let mut hermite = vec![SparsePoly::zero(); pk.coeffs().len().saturating_sub(1)];
        for (m, c) in pk.iter_nonzero() {
            if m == 0 {
                return Err(EngineError::Inconsistent(format!("constant term in correction {k}")));
            }
            hermite[m - 1] += &(-(c * &SparsePoly::var_pow(Symbol::R, -(m as i32))));
        }
        out.push(QPolynomial::from_hermite(hermite));
    }
    Ok(out)
}

/// Symbolic expansion of one statistic family through order `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionSet {
    arity: Arity,
    order: u32,
    k_table: KTable,
    q: Vec<QPolynomial>,
}

impl ExpansionSet {
    pub fn new(arity: Arity, k_table: KTable) -> Result<Self, EngineError> {
        let q = build_q(&KTable::formal(k_table.order()))?;
        Ok(ExpansionSet { arity, order: k_table.order(), k_table, q })
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Symbolic `r^2`, equal to `k_{2,1}`.
    pub fn r2(&self) -> SparsePoly {
        self.k_table.get(2, 1)
    }

    pub fn k_table(&self) -> &KTable {
        &self.k_table
    }

    /// `q_1..q_K` over the formal `k[j,l]` and `r` symbols.
    pub fn q(&self) -> &[QPolynomial] {
        &self.q
    }

    /// `q_k` with the table entries substituted for the formal symbols, so
    /// that coefficients are polynomials in moments, `A`, `B`, weights and `r`.
    pub fn q_expanded(&self, k: usize) -> Result<QPolynomial, EngineError> {
        let q = self
            .q
            .get(k.wrapping_sub(1))
            .ok_or(EngineError::TermsExceedOrder { terms: k as u32, order: self.order })?;
        q.substitute_all(&|c| substitute_table(c, &self.k_table))
    }

    /// Binds numbers to every symbol and returns an evaluator. `n` is the
    /// effective sample size multiplying the correction terms.
    pub fn bind(&self, n: f64, env: &Binding) -> Result<BoundExpansion, EngineError> {
        let mut k_values = BTreeMap::new();
        for ((j, l), v) in self.k_table.entries() {
            k_values.insert((j, l), v.eval(|s| env.get(s))?);
        }
        let r2 = k_values.get(&(2, 1)).copied().unwrap_or(0.0);
        if !(r2 > 0.0 && r2.is_finite()) {
            return Err(EngineError::NonPositiveR2(r2));
        }
        let r = r2.sqrt();
        let lookup = |s: Symbol| match s {
            Symbol::Cumulant(j, l) => Some(k_values.get(&(j, l)).copied().unwrap_or(0.0)),
            Symbol::R => Some(r),
            _ => None,
        };
        let mut q = Vec::with_capacity(self.q.len());
        for qk in &self.q {
            let coeffs = qk.power.coeffs().iter().map(|c| c.eval(lookup)).collect::<Result<Vec<f64>, _>>()?;
            q.push(UniPoly::new(coeffs));
        }
        Ok(BoundExpansion { n, r2, r, k_values, q })
    }

    /// Canonical JSON document.
    pub fn to_json(&self, with_k_table: bool) -> Value {
        let q: Vec<Value> = self
            .q
            .iter()
            .enumerate()
            .map(|(i, qk)| {
                let hermite: Vec<Value> = qk
                    .hermite
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(d, c)| json!({"degree": d, "coefficient": poly_json(c)}))
                    .collect();
                let power: Vec<Value> =
                    qk.power.iter_nonzero().map(|(d, c)| json!({"power": d, "coefficient": poly_json(c)})).collect();
                json!({"k": i + 1, "hermite": hermite, "power": power})
            })
            .collect();
        let mut doc = json!({
            "arity": self.arity,
            "order": self.order,
            "variable": "y = x / r",
            "r2": poly_json(&self.r2()),
            "q": q,
        });
        if with_k_table {
            let entries: Vec<Value> =
                self.k_table.entries().map(|((j, l), v)| json!({"j": j, "l": l, "value": poly_json(v)})).collect();
            doc["k_table"] = Value::Array(entries);
        }
        doc
    }

    /// Inverse of [`ExpansionSet::to_json`]; the document must carry the
    /// k-table.
    pub fn from_json(doc: &Value) -> Result<Self, EngineError> {
        let bad = |what: &str| EngineError::Json(what.to_string());
        let arity: Arity =
            serde_json::from_value(doc["arity"].clone()).map_err(|e| EngineError::Json(e.to_string()))?;
        let order = doc["order"].as_u64().ok_or_else(|| bad("missing order"))? as u32;
        let mut k_table = KTable::new(order);
        for e in doc["k_table"].as_array().ok_or_else(|| bad("missing k_table"))? {
            let j = e["j"].as_u64().and_then(|v| v.to_u8()).ok_or_else(|| bad("bad j"))?;
            let l = e["l"].as_u64().and_then(|v| v.to_u8()).ok_or_else(|| bad("bad l"))?;
            k_table.insert(j, l, poly_from_json(&e["value"])?);
        }
        let mut q = Vec::new();
        for (i, qk) in doc["q"].as_array().ok_or_else(|| bad("missing q"))?.iter().enumerate() {
            let mut hermite = Vec::new();
            for h in qk["hermite"].as_array().ok_or_else(|| bad("missing hermite list"))? {
                let d = h["degree"].as_u64().ok_or_else(|| bad("bad degree"))? as usize;
                if hermite.len() <= d {
                    hermite.resize(d + 1, SparsePoly::zero());
                }
                hermite[d] = poly_from_json(&h["coefficient"])?;
            }
            if qk["k"].as_u64() != Some(i as u64 + 1) {
                return Err(bad("q entries out of order"));
            }
            q.push(QPolynomial::from_hermite(hermite));
        }
        if q.len() != order as usize {
            return Err(bad("q length differs from order"));
        }
        Ok(ExpansionSet { arity, order, k_table, q })
    }
}

fn substitute_table(c: &SparsePoly, table: &KTable) -> Result<SparsePoly, EngineError> {
    let mut out = c.clone();
    for sym in c.symbols() {
        if let Symbol::Cumulant(j, l) = sym {
            out = out.substitute(sym, &table.get(j, l))?;
        }
    }
    Ok(out)
}

pub(crate) fn poly_json(p: &SparsePoly) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(m, c)| json!({"monomial": m.to_string(), "coefficient": rational::to_ratio_string(c)}))
        .collect();
    json!({"text": p.to_string(), "terms": terms})
}

pub(crate) fn poly_from_json(v: &Value) -> Result<SparsePoly, EngineError> {
    let text = v["text"].as_str().ok_or_else(|| EngineError::Json("polynomial without text".into()))?;
    Ok(text.parse()?)
}

/// Numeric symbol values for binding an expansion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Binding {
    values: BTreeMap<Symbol, f64>,
}

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn set(&mut self, sym: Symbol, value: f64) -> &mut Self {
        self.values.insert(sym, value);
        self
    }

    pub fn with(mut self, sym: Symbol, value: f64) -> Self {
        self.values.insert(sym, value);
        self
    }

    pub fn get(&self, sym: Symbol) -> Option<f64> {
        self.values.get(&sym).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Symbol, f64)> + '_ {
        self.values.iter().map(|(s, v)| (*s, *v))
    }
}

/// An expansion with every coefficient reduced to a number.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundExpansion {
    n: f64,
    r2: f64,
    r: f64,
    k_values: BTreeMap<(u8, u8), f64>,
    q: Vec<UniPoly<f64>>,
}

impl BoundExpansion {
    pub fn order(&self) -> u32 {
        self.q.len() as u32
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn k_value(&self, j: u8, l: u8) -> f64 {
        self.k_values.get(&(j, l)).copied().unwrap_or(0.0)
    }

    /// `q_k` as a polynomial in `y = x / r`.
    pub fn q(&self, k: usize) -> Option<&UniPoly<f64>> {
        self.q.get(k.wrapping_sub(1))
    }

    /// `Phi(y) + sum_{k <= terms} n^(-k/2) q_k(y) phi(y)` with `y = x / r`.
    pub fn cdf(&self, x: f64, terms: u32) -> Result<f64, EngineError> {
        if terms > self.order() {
            return Err(EngineError::TermsExceedOrder { terms, order: self.order() });
        }
        Ok(self.cdf_all(x)[terms as usize])
    }

    /// Values for every truncation `0..=K`.
    pub fn cdf_all(&self, x: f64) -> Vec<f64> {
        let y = x / self.r;
        let mut out = Vec::with_capacity(self.q.len() + 1);
        let mut acc = normal_cdf(y);
        out.push(acc);
        if x.is_infinite() {
            out.resize(self.q.len() + 1, acc);
            return out;
        }
        let pdf = normal_pdf(y);
        let step = self.n.powf(-0.5);
        let mut scale = 1.0;
        for qk in &self.q {
            scale *= step;
            acc += scale * qk.eval(y) * pdf;
            out.push(acc);
        }
        out
    }
}

/// Evaluates the `terms`-term expansion at `x`.
pub fn evaluate_cdf(es: &ExpansionSet, n: f64, env: &Binding, x: f64, terms: u32) -> Result<f64, EngineError> {
    es.bind(n, env)?.cdf(x, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(j: u8, l: u8) -> SparsePoly {
        SparsePoly::var(Symbol::Cumulant(j, l))
    }

    fn r(e: i32) -> SparsePoly {
        SparsePoly::var_pow(Symbol::R, e)
    }

    #[test]
    fn first_two_corrections() {
        let q = build_q(&KTable::formal(2)).unwrap();
        // -k31 He_2 / (6 r^3) - k12 He_0 / r
        let q1 = &q[0].hermite;
        assert_eq!(q1.len(), 3);
        assert_eq!(q1[0], -(k(1, 2) * r(-1)));
        assert!(q1[1].is_zero());
        assert_eq!(q1[2], (k(3, 1) * r(-3)).scale(&rational::rat(-1, 6)));
        let q2 = &q[1].hermite;
        assert_eq!(q2[5], (k(3, 1).pow(2) * r(-6)).scale(&rational::rat(-1, 72)));
        let c3 = (k(1, 2) * k(3, 1)).scale(&rational::int(4)) + k(4, 1);
        assert_eq!(q2[3], (c3 * r(-4)).scale(&rational::rat(-1, 24)));
        let c1 = k(1, 2).pow(2) + k(2, 2);
        assert_eq!(q2[1], (c1 * r(-2)).scale(&rational::rat(-1, 2)));
        for d in [0, 2, 4] {
            assert!(q2[d].is_zero());
        }
    }

    #[test]
    fn only_variance_gives_zero_corrections() {
        let mut t = KTable::new(4);
        t.insert(2, 1, SparsePoly::constant(rational::rat(9, 10)));
        for q in build_q(&t).unwrap() {
            assert!(q.is_zero());
        }
    }

    #[test]
    fn zero_terms_is_normal() {
        let mut t = KTable::new(0);
        t.insert(2, 1, SparsePoly::one());
        let es = ExpansionSet::new(Arity::OneSample, t).unwrap();
        let b = es.bind(10.0, &Binding::new()).unwrap();
        assert_eq!(b.cdf(0.0, 0).unwrap(), 0.5);
        assert!((b.cdf(40.0, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!(b.cdf(0.0, 1).is_err());
    }
}
