//! Estimator constants `(A, B, r^2, b_x, b_y, n)` for the supported
//! statistics and plug-in moment estimates from data.
//!
//! Every variance estimator is written as `s^2 = A + B (Xbar_s - Xbar^2)`
//! (one sample) or `A + B_x (..) + B_y (..)` (two samples), with `A`, `B`
//! depending on the sample sizes but not on the data.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::rational::{self, Rational};
use crate::algebra::{central_moments_to_cumulants, cumulants_to_central_moments, Symbol};
use crate::engine::{Arity, Binding, Estimator, StatisticKind};

/// Highest central moment estimated from data.
pub const MAX_DATA_MOMENT: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error("sample size {0} is too small (need at least 2)")]
    SampleSize(u64),
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(String),
    #[error("{0} needs a prior (d0, s02)")]
    MissingPrior(StatisticKind),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("two-pooled assumes equal variances; declare them equal to use it")]
    EqualVarianceRequired,
    #[error("{kind} is not a {arity:?} statistic")]
    WrongArity { kind: StatisticKind, arity: Arity },
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("{have} moments available, {need} required")]
    TooFewMoments { have: usize, need: usize },
    #[error("inconsistent moment specification: {0}")]
    Inconsistent(String),
    #[error("moment specification: {0}")]
    Json(String),
}

/// Prior for the moderated statistic, treated as known constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeratedPrior {
    pub d0: Rational,
    pub s02: Rational,
}

impl ModeratedPrior {
    pub fn new(d0: Rational, s02: Rational) -> Result<Self, EstimatorError> {
        if d0.is_negative() {
            return Err(EstimatorError::InvalidPrior(format!("d0 = {d0} is negative")));
        }
        if !s02.is_positive() {
            return Err(EstimatorError::InvalidPrior(format!("s02 = {s02} is not positive")));
        }
        Ok(ModeratedPrior { d0, s02 })
    }

    pub fn from_f64(d0: f64, s02: f64) -> Result<Self, EstimatorError> {
        let conv = |x: f64, name: &str| {
            rational::from_f64(x).ok_or_else(|| EstimatorError::InvalidPrior(format!("{name} = {x}")))
        };
        ModeratedPrior::new(conv(d0, "d0")?, conv(s02, "s02")?)
    }
}

/// Numeric constants for one row of the estimator tables.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorSpec {
    pub kind: StatisticKind,
    /// Sample size; `(n_x + n_y) / 2` for two samples.
    pub n: Rational,
    pub a: Rational,
    /// `B` for one sample, `B_x` for two.
    pub b_x: Rational,
    /// Zero for one sample.
    pub b_y: Rational,
    /// `n / n_x`; one for a single sample.
    pub weight_x: Rational,
    pub weight_y: Rational,
    /// Closed-form variance adjustment.
    pub r2: Rational,
    /// Variance entering `r^2 = sigma^2 / A` (pooled for two samples).
    pub sigma2: Rational,
}

fn ratio(n: u64, d: u64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn positive(v: &Rational) -> Result<(), EstimatorError> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(EstimatorError::NonPositiveVariance(rational::to_ratio_string(v)))
    }
}

/// One-sample row: biased `(sigma^2, 1, 1)`, unbiased `(C sigma^2, C, 1/C)`
/// with `C = n/(n-1)`, moderated with prior `(d0, s0^2)`.
pub fn one_sample_spec(
    kind: StatisticKind,
    n: u64,
    sigma2: &Rational,
    prior: Option<&ModeratedPrior>,
) -> Result<EstimatorSpec, EstimatorError> {
    if kind.arity() != Arity::OneSample {
        return Err(EstimatorError::WrongArity { kind, arity: Arity::OneSample });
    }
    if n < 2 {
        return Err(EstimatorError::SampleSize(n));
    }
    positive(sigma2)?;
    let nn = Rational::from_integer(n.into());
    let one = Rational::one();
    let (a, b, r2) = match kind.estimator() {
        Estimator::Biased => (sigma2.clone(), one.clone(), one.clone()),
        Estimator::Unbiased => {
            let c = ratio(n, n - 1);
            (&c * sigma2, c.clone(), c.recip())
        }
        _ => {
            let p = prior.ok_or(EstimatorError::MissingPrior(kind))?;
            let den = &p.d0 + &nn - &one;
            let a = (&p.d0 * &p.s02 + &nn * sigma2) / &den;
            let b = &nn / &den;
            let r2 = &den / (&p.d0 * &p.s02 / sigma2 + &nn);
            (a, b, r2)
        }
    };
    Ok(EstimatorSpec {
        kind,
        n: nn,
        a,
        b_x: b,
        b_y: Rational::zero(),
        weight_x: one.clone(),
        weight_y: Rational::zero(),
        r2,
        sigma2: sigma2.clone(),
    })
}

/// Two-sample row with `n = (n_x + n_y)/2`, `b_x = n/n_x`, `b_y = n/n_y`.
///
/// The pooled and moderated rows assume a common variance; it is taken as
/// `(b_x sigma_x^2 + b_y sigma_y^2) / (b_x + b_y)`, which equals the common
/// value when the two agree.
pub fn two_sample_spec(
    kind: StatisticKind,
    nx: u64,
    ny: u64,
    sigma2x: &Rational,
    sigma2y: &Rational,
    prior: Option<&ModeratedPrior>,
    equal_variance: bool,
) -> Result<EstimatorSpec, EstimatorError> {
    if kind.arity() != Arity::TwoSample {
        return Err(EstimatorError::WrongArity { kind, arity: Arity::TwoSample });
    }
    for size in [nx, ny] {
        if size < 2 {
            return Err(EstimatorError::SampleSize(size));
        }
    }
    positive(sigma2x)?;
    positive(sigma2y)?;
    let one = Rational::one();
    let n = ratio(nx + ny, 2);
    let bx = &n / Rational::from_integer(nx.into());
    let by = &n / Rational::from_integer(ny.into());
    let pooled_sigma2 = (&bx * sigma2x + &by * sigma2y) / (&bx + &by);
    let cxy = ratio(nx + ny, nx + ny - 2);
    let (a, b_x, b_y, r2, sigma2) = match kind.estimator() {
        Estimator::WelchBiased => (&bx * sigma2x + &by * sigma2y, bx.clone(), by.clone(), one.clone(), pooled_sigma2),
        Estimator::WelchUnbiased => {
            let cx = ratio(nx, nx - 1);
            let cy = ratio(ny, ny - 1);
            let a = &cx * &bx * sigma2x + &cy * &by * sigma2y;
            let r2 = (&bx * sigma2x + &by * sigma2y) / &a;
            (a, &cx * &bx, &cy * &by, r2, pooled_sigma2)
        }
        Estimator::Pooled => {
            if !equal_variance {
                return Err(EstimatorError::EqualVarianceRequired);
            }
            let a = &cxy * (&bx + &by) * &pooled_sigma2;
            (a, &cxy * &by, &cxy * &bx, cxy.recip(), pooled_sigma2)
        }
        _ => {
            let p = prior.ok_or(EstimatorError::MissingPrior(kind))?;
            let dg = Rational::from_integer((nx + ny - 2).into());
            let den = &p.d0 + &dg;
            let a = (&bx + &by) * (&p.d0 * &p.s02 + &cxy * &dg * &pooled_sigma2) / &den;
            let b_x = &cxy * &dg * &by / &den;
            let b_y = &cxy * &dg * &bx / &den;
            let r2 = &den / (&p.d0 * &p.s02 / &pooled_sigma2 + &cxy * &dg);
            (a, b_x, b_y, r2, pooled_sigma2)
        }
    };
    Ok(EstimatorSpec { kind, n, a, b_x, b_y, weight_x: bx, weight_y: by, r2, sigma2 })
}

impl EstimatorSpec {
    /// `r^2` recomputed as `(b_x sigma_x^2 + b_y sigma_y^2) / A` (one sample:
    /// `sigma^2 / A`).
    pub fn r2_from_variances(&self, sigma2x: &Rational, sigma2y: &Rational) -> Rational {
        match self.kind.arity() {
            Arity::OneSample => sigma2x / &self.a,
            Arity::TwoSample => (&self.weight_x * sigma2x + &self.weight_y * sigma2y) / &self.a,
        }
    }

    pub fn n_f64(&self) -> f64 {
        rational::to_f64(&self.n)
    }

    /// Symbol values for an expansion of this statistic.
    pub fn binding(&self, x: &MomentSet, y: Option<&MomentSet>, order: u32) -> Result<Binding, EstimatorError> {
        let need = order as usize + 2;
        let mut b = Binding::new();
        b.set(Symbol::A, rational::to_f64(&self.a));
        b.set(Symbol::Bx, rational::to_f64(&self.b_x));
        x.bind_into(&mut b, need, Symbol::MomentX)?;
        if self.kind.arity() == Arity::TwoSample {
            let y = y.ok_or_else(|| EstimatorError::Inconsistent("second sample moments missing".into()))?;
            b.set(Symbol::By, rational::to_f64(&self.b_y));
            b.set(Symbol::WeightX, rational::to_f64(&self.weight_x));
            b.set(Symbol::WeightY, rational::to_f64(&self.weight_y));
            y.bind_into(&mut b, need, Symbol::MomentY)?;
        }
        Ok(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentSource {
    Data,
    Declared,
}

/// Central moments of one sample's distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSet {
    /// `mu[0]` is `mu_2 = sigma^2`, `mu[i]` is `mu_{i+2}`.
    mu: Vec<f64>,
    n_obs: u64,
    source: MomentSource,
}

impl MomentSet {
    /// Declared moments `mu_2, mu_3, ...`.
    pub fn declared(n_obs: u64, mu: Vec<f64>) -> Result<Self, EstimatorError> {
        if let Some(i) = mu.iter().position(|v| !v.is_finite()) {
            return Err(EstimatorError::NonFinite(i));
        }
        match mu.first() {
            None => return Err(EstimatorError::TooFewMoments { have: 0, need: 1 }),
            Some(&s) if s <= 0.0 => return Err(EstimatorError::NonPositiveVariance(s.to_string())),
            _ => {}
        }
        Ok(MomentSet { mu, n_obs, source: MomentSource::Declared })
    }

    /// Moments of a law with cumulants `kappa_2, kappa_3, ...` (mean zero).
    pub fn from_cumulants(n_obs: u64, kappa: &[f64]) -> Result<Self, EstimatorError> {
        MomentSet::declared(n_obs, cumulants_to_central_moments(kappa))
    }

    /// Normal law: `mu_j = (j-1)!! sigma^j` for even `j`, zero otherwise.
    pub fn normal(n_obs: u64, sigma2: f64, max_order: usize) -> Result<Self, EstimatorError> {
        let mut kappa = vec![0.0; max_order.saturating_sub(1)];
        if let Some(k) = kappa.first_mut() {
            *k = sigma2;
        }
        MomentSet::from_cumulants(n_obs, &kappa)
    }

    pub fn sigma2(&self) -> f64 {
        self.mu[0]
    }

    /// `mu_j` for `j >= 2`, if available.
    pub fn mu(&self, j: usize) -> Option<f64> {
        j.checked_sub(2).and_then(|i| self.mu.get(i)).copied()
    }

    /// `mu_2, mu_3, ...`.
    pub fn central(&self) -> &[f64] {
        &self.mu
    }

    /// Highest available moment order.
    pub fn max_order(&self) -> usize {
        self.mu.len() + 1
    }

    pub fn n_obs(&self) -> u64 {
        self.n_obs
    }

    pub fn source(&self) -> MomentSource {
        self.source
    }

    pub fn lambda(&self) -> Vec<f64> {
        standardized_cumulants(self)
    }

    fn bind_into(&self, b: &mut Binding, need: usize, sym: fn(u8) -> Symbol) -> Result<(), EstimatorError> {
        if self.max_order() < need {
            return Err(EstimatorError::TooFewMoments { have: self.max_order(), need });
        }
        for (i, &v) in self.mu.iter().enumerate().take(need - 1) {
            b.set(sym(i as u8 + 2), v);
        }
        Ok(())
    }
}

/// Plug-in central moments `mu_2..mu_M` (power sums about the sample mean
/// divided by the number of observations).
pub fn central_moments_from_data(data: &[f64], max_order: usize) -> Result<MomentSet, EstimatorError> {
    if data.len() < 2 {
        return Err(EstimatorError::SampleSize(data.len() as u64));
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(EstimatorError::NonFinite(i));
    }
    let max_order = max_order.clamp(2, MAX_DATA_MOMENT);
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let mut sums = vec![0.0; max_order - 1];
    for &x in data {
        let d = x - mean;
        let mut p = d;
        for s in sums.iter_mut() {
            p *= d;
            *s += p;
        }
    }
    let mu: Vec<f64> = sums.into_iter().map(|s| s / n).collect();
    if mu[0] <= 0.0 {
        return Err(EstimatorError::NonPositiveVariance(mu[0].to_string()));
    }
    Ok(MomentSet { mu, n_obs: data.len() as u64, source: MomentSource::Data })
}

/// `lambda_3..lambda_M` with `lambda_j = kappa_j / sigma^j`.
pub fn standardized_cumulants(ms: &MomentSet) -> Vec<f64> {
    let kappa = central_moments_to_cumulants(&ms.mu);
    let sigma = ms.sigma2().sqrt();
    kappa.iter().enumerate().skip(1).map(|(i, k)| k / sigma.powi(i as i32 + 2)).collect()
}

#[derive(Serialize, Deserialize)]
struct SampleJson {
    n: u64,
    #[serde(default)]
    sigma2: Option<f64>,
    mu: Vec<f64>,
    #[serde(default)]
    source: Option<MomentSource>,
}

/// Parsed moment-spec document: one sample, or `x` and `y`.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentInput {
    One(MomentSet),
    Two(MomentSet, MomentSet),
}

impl MomentInput {
    pub fn from_json(text: &str) -> Result<Self, EstimatorError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| EstimatorError::Json(e.to_string()))?;
        let one = |v: &serde_json::Value| -> Result<MomentSet, EstimatorError> {
            let s: SampleJson = serde_json::from_value(v.clone()).map_err(|e| EstimatorError::Json(e.to_string()))?;
            if let (Some(sigma2), Some(mu2)) = (s.sigma2, s.mu.first()) {
                if (sigma2 - mu2).abs() > 1e-12 * sigma2.abs().max(1.0) {
                    return Err(EstimatorError::Inconsistent(format!("sigma2 = {sigma2} but mu[0] = {mu2}")));
                }
            }
            let mut ms = MomentSet::declared(s.n, s.mu)?;
            ms.source = s.source.unwrap_or(MomentSource::Declared);
            Ok(ms)
        };
        match (v.get("x"), v.get("y")) {
            (Some(x), Some(y)) => Ok(MomentInput::Two(one(x)?, one(y)?)),
            (None, None) => Ok(MomentInput::One(one(&v)?)),
            _ => Err(EstimatorError::Json("two-sample spec needs both \"x\" and \"y\"".into())),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let one = |m: &MomentSet| {
            serde_json::to_value(SampleJson {
                n: m.n_obs,
                sigma2: Some(m.sigma2()),
                mu: m.mu.clone(),
                source: Some(m.source),
            })
            .expect("plain data serializes")
        };
        match self {
            MomentInput::One(m) => one(m),
            MomentInput::Two(x, y) => serde_json::json!({"x": one(x), "y": one(y)}),
        }
    }
}
