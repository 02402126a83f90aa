//! Monte Carlo sampling distributions of the supported statistics.
//!
//! Replicate `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so
//! results do not depend on how replicates are spread over threads.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::rational::{self, Rational};
use crate::engine::{Arity, Estimator, StatisticKind};
use crate::estimators::{EstimatorError, ModeratedPrior, MomentSet};

pub use crate::dist::student_t_cdf;

/// Largest tolerated fraction of replicates redrawn for a zero variance
/// estimate.
pub const MAX_DEGENERATE_RATE: f64 = 1e-4;

#[derive(Debug, thiserror::Error)]
pub enum McError {
    #[error("invalid generator `{token}`: {reason}")]
    InvalidGenerator { token: String, reason: String },
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("sample sizes do not match {kind}: {detail}")]
    InvalidSizes { kind: StatisticKind, detail: String },
    #[error("{count} of {reps} replicates had zero variance, above the tolerated rate {MAX_DEGENERATE_RATE}")]
    Degenerate { count: u64, reps: u64 },
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// Data-generating law.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    /// Gamma with the given shape and scale, optionally shifted to mean zero.
    Gamma {
        shape: f64,
        scale: f64,
        centered: bool,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Finite support with exact probabilities summing to one.
    Discrete {
        support: Vec<f64>,
        probs: Vec<Rational>,
    },
}

impl GeneratorSpec {
    pub fn mean(&self) -> f64 {
        match self {
            GeneratorSpec::Gamma { shape, scale, centered } => {
                if *centered {
                    0.0
                } else {
                    shape * scale
                }
            }
            GeneratorSpec::Normal { mean, .. } => *mean,
            GeneratorSpec::Discrete { support, probs } => {
                support.iter().zip(probs).map(|(x, p)| x * rational::to_f64(p)).sum()
            }
        }
    }

    /// Central moments `mu_2..mu_max` of the law.
    pub fn moments(&self, n_obs: u64, max_order: usize) -> Result<MomentSet, EstimatorError> {
        match self {
            GeneratorSpec::Gamma { shape, scale, .. } => {
                // kappa_j = shape * scale^j * (j-1)!
                let kappa: Vec<f64> = (2..=max_order)
                    .map(|j| {
                        let fact: f64 = (1..j).map(|i| i as f64).product();
                        shape * scale.powi(j as i32) * fact
                    })
                    .collect();
                MomentSet::from_cumulants(n_obs, &kappa)
            }
            GeneratorSpec::Normal { sd, .. } => MomentSet::normal(n_obs, sd * sd, max_order),
            GeneratorSpec::Discrete { .. } => {
                let mu = self.exact_central_moments(max_order).unwrap_or_default();
                MomentSet::declared(n_obs, mu.iter().map(rational::to_f64).collect())
            }
        }
    }

    /// Exact central moments `mu_2..mu_max` for a discrete law with
    /// rational support points.
    pub fn exact_central_moments(&self, max_order: usize) -> Option<Vec<Rational>> {
        let GeneratorSpec::Discrete { support, probs } = self else {
            return None;
        };
        let xs: Vec<Rational> = support.iter().map(|&x| rational::from_f64(x)).collect::<Option<_>>()?;
        let mean: Rational = xs.iter().zip(probs).map(|(x, p)| x * p).sum();
        Some(
            (2..=max_order)
                .map(|j| xs.iter().zip(probs).map(|(x, p)| rational::powi(&(x - &mean), j as i32) * p).sum())
                .collect(),
        )
    }

    fn sampler(&self) -> Sampler {
        match self {
            GeneratorSpec::Gamma { shape, scale, centered } => Sampler::Gamma {
                dist: Gamma::new(*shape, *scale).expect("validated parameters"),
                shift: if *centered { shape * scale } else { 0.0 },
            },
            GeneratorSpec::Normal { mean, sd } => {
                Sampler::Normal(Normal::new(*mean, *sd).expect("validated parameters"))
            }
            GeneratorSpec::Discrete { support, probs } => {
                let mut acc = Rational::zero();
                let cumulative = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        rational::to_f64(&acc)
                    })
                    .collect();
                Sampler::Discrete { support: support.clone(), cumulative }
            }
        }
    }
}

enum Sampler {
    Gamma { dist: Gamma<f64>, shift: f64 },
    Normal(Normal<f64>),
    Discrete { support: Vec<f64>, cumulative: Vec<f64> },
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Gamma { dist, shift } => dist.sample(rng) - shift,
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Discrete { support, cumulative } => {
                let u: f64 = rng.gen();
                let i = cumulative.partition_point(|&c| c <= u).min(support.len() - 1);
                support[i]
            }
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = McError;

    /// `gamma:SHAPE:SCALE[:centered]`, `normal:MEAN:SD`,
    /// `discrete:X1,X2,...:P1,P2,...` with rational probabilities.
    fn from_str(token: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| McError::InvalidGenerator { token: token.to_string(), reason: reason.to_string() };
        let parts: Vec<&str> = token.split(':').collect();
        let num = |s: &str| -> Result<f64, McError> {
            s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(&format!("`{s}` is not a number")))
        };
        match parts.as_slice() {
            ["gamma", shape, scale, rest @ ..] => {
                let centered = match rest {
                    [] => false,
                    ["centered"] => true,
                    _ => return Err(bad("expected gamma:SHAPE:SCALE[:centered]")),
                };
                let (shape, scale) = (num(shape)?, num(scale)?);
                if shape <= 0.0 || scale <= 0.0 {
                    return Err(bad("shape and scale must be positive"));
                }
                Ok(GeneratorSpec::Gamma { shape, scale, centered })
            }
            ["normal", mean, sd] => {
                let (mean, sd) = (num(mean)?, num(sd)?);
                if sd <= 0.0 {
                    return Err(bad("sd must be positive"));
                }
                Ok(GeneratorSpec::Normal { mean, sd })
            }
            ["discrete", support, probs] => {
                let support: Vec<f64> = support.split(',').map(num).collect::<Result<_, _>>()?;
                let probs: Vec<Rational> = probs
                    .split(',')
                    .map(|p| rational::parse_ratio(p.trim()).map_err(|_| bad(&format!("`{p}` is not a rational"))))
                    .collect::<Result<_, _>>()?;
                if support.len() != probs.len() || support.is_empty() {
                    return Err(bad("support and probabilities differ in length"));
                }
                if probs.iter().any(|p| !p.is_positive()) {
                    return Err(bad("probabilities must be positive"));
                }
                if probs.iter().sum::<Rational>() != Rational::one() {
                    return Err(bad("probabilities must sum to exactly 1"));
                }
                Ok(GeneratorSpec::Discrete { support, probs })
            }
            _ => Err(bad("expected gamma:..., normal:... or discrete:...")),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Gamma { shape, scale, centered } => {
                write!(f, "gamma:{shape}:{scale}")?;
                if *centered {
                    f.write_str(":centered")?;
                }
                Ok(())
            }
            GeneratorSpec::Normal { mean, sd } => write!(f, "normal:{mean}:{sd}"),
            GeneratorSpec::Discrete { support, probs } => {
                let s: Vec<String> = support.iter().map(|x| x.to_string()).collect();
                let p: Vec<String> = probs.iter().map(rational::to_ratio_string).collect();
                write!(f, "discrete:{}:{}", s.join(","), p.join(","))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum SampleSizes {
    One(u64),
    Two(u64, u64),
}

/// Sorted simulated statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
    seed: u64,
    degenerate: u64,
}

impl EmpiricalCdf {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn reps(&self) -> usize {
        self.values.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Replicates redrawn because the variance estimate was zero.
    pub fn degenerate(&self) -> u64 {
        self.degenerate
    }

    /// Fraction of values `<= x`.
    pub fn at(&self, x: f64) -> f64 {
        empirical_cdf_at(self, x)
    }

    /// Standard error of the empirical CDF at `x`.
    pub fn std_error(&self, x: f64) -> f64 {
        let p = self.at(x);
        (p * (1.0 - p) / self.reps() as f64).sqrt()
    }
}

pub fn empirical_cdf_at(e: &EmpiricalCdf, x: f64) -> f64 {
    if e.values.is_empty() {
        return f64::NAN;
    }
    e.values.partition_point(|&v| v <= x) as f64 / e.values.len() as f64
}

struct StatisticPlan {
    kind: StatisticKind,
    sizes: SampleSizes,
    prior: Option<(f64, f64)>,
}

impl StatisticPlan {
    /// The statistic for one data set, or `None` when the variance estimate
    /// is zero. Data are centered at the generator mean.
    fn value(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        let summary = |d: &[f64]| {
            let n = d.len() as f64;
            let mean = d.iter().sum::<f64>() / n;
            let ss = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            (n, mean, ss)
        };
        let (nx, mx, ssx) = summary(x);
        let (num, s2, n) = match self.sizes {
            SampleSizes::One(_) => {
                let s2 = match self.kind.estimator() {
                    Estimator::Biased => ssx / nx,
                    Estimator::Unbiased => ssx / (nx - 1.0),
                    _ => {
                        let (d0, s02) = self.prior.expect("checked prior");
                        (d0 * s02 + ssx) / (d0 + nx - 1.0)
                    }
                };
                (mx, s2, nx)
            }
            SampleSizes::Two(..) => {
                let (ny, my, ssy) = summary(y);
                let n = 0.5 * (nx + ny);
                let (bx, by) = (n / nx, n / ny);
                let s2 = match self.kind.estimator() {
                    Estimator::WelchBiased => bx * ssx / nx + by * ssy / ny,
                    Estimator::WelchUnbiased => bx * ssx / (nx - 1.0) + by * ssy / (ny - 1.0),
                    Estimator::Pooled => {
                        let cxy = (nx + ny) / (nx + ny - 2.0);
                        cxy * (bx + by) * (ssx + ssy) / (nx + ny)
                    }
                    _ => {
                        let (d0, s02) = self.prior.expect("checked prior");
                        let dg = nx + ny - 2.0;
                        (bx + by) * (d0 * s02 + ssx + ssy) / (d0 + dg)
                    }
                };
                (mx - my, s2, n)
            }
        };
        (s2 > 0.0).then(|| n.sqrt() * num / s2.sqrt())
    }
}

/// Simulates `reps` values of the statistic under `gen` (both samples drawn
/// from the same law for two-sample kinds).
pub fn sample_statistic(
    gen: &GeneratorSpec,
    kind: StatisticKind,
    sizes: SampleSizes,
    reps: u64,
    seed: u64,
    prior: Option<&ModeratedPrior>,
) -> Result<EmpiricalCdf, McError> {
    if reps == 0 {
        return Err(McError::NoReplicates);
    }
    let (nx, ny) = match (kind.arity(), sizes) {
        (Arity::OneSample, SampleSizes::One(n)) if n >= 2 => (n as usize, 0),
        (Arity::TwoSample, SampleSizes::Two(a, b)) if a >= 2 && b >= 2 => (a as usize, b as usize),
        _ => return Err(McError::InvalidSizes { kind, detail: format!("{sizes:?}") }),
    };
    let prior = if kind.estimator() == Estimator::Moderated {
        let p = prior.ok_or(EstimatorError::MissingPrior(kind))?;
        Some((rational::to_f64(&p.d0), rational::to_f64(&p.s02)))
    } else {
        None
    };
    let plan = StatisticPlan { kind, sizes, prior };
    let sampler = gen.sampler();
    let mean = gen.mean();
    let max_redraws = ((reps as f64 * MAX_DEGENERATE_RATE).floor() as u64).max(1);

    let draws: Vec<(f64, u64)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep);
            let mut x = vec![0.0; nx];
            let mut y = vec![0.0; ny];
            let mut redraws = 0u64;
            loop {
                for v in x.iter_mut().chain(y.iter_mut()) {
                    *v = sampler.draw(&mut rng) - mean;
                }
                if let Some(t) = plan.value(&x, &y) {
                    return (t, redraws);
                }
                redraws += 1;
                if redraws > max_redraws {
                    return (f64::NAN, redraws);
                }
            }
        })
        .collect();
    let degenerate: u64 = draws.iter().map(|d| d.1).sum();
    if degenerate as f64 > reps as f64 * MAX_DEGENERATE_RATE || draws.iter().any(|d| d.0.is_nan()) {
        return Err(McError::Degenerate { count: degenerate, reps });
    }
    let mut values: Vec<f64> = draws.into_iter().map(|d| d.0).collect();
    values.sort_by(f64::total_cmp);
    Ok(EmpiricalCdf { values, seed, degenerate })
}
