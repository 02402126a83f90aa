use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EngineError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arity {
    OneSample,
    TwoSample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Biased,
    Unbiased,
    Pooled,
    WelchBiased,
    WelchUnbiased,
    Moderated,
}

/// A supported t-statistic: sample layout plus variance estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StatisticKind {
    arity: Arity,
    estimator: Estimator,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 7] = [
        StatisticKind { arity: Arity::OneSample, estimator: Estimator::Biased },
        StatisticKind { arity: Arity::OneSample, estimator: Estimator::Unbiased },
        StatisticKind { arity: Arity::OneSample, estimator: Estimator::Moderated },
        StatisticKind { arity: Arity::TwoSample, estimator: Estimator::Pooled },
        StatisticKind { arity: Arity::TwoSample, estimator: Estimator::WelchBiased },
        StatisticKind { arity: Arity::TwoSample, estimator: Estimator::WelchUnbiased },
        StatisticKind { arity: Arity::TwoSample, estimator: Estimator::Moderated },
    ];

    pub fn new(arity: Arity, estimator: Estimator) -> Result<Self, EngineError> {
        use Estimator::*;
        let ok = match arity {
            Arity::OneSample => matches!(estimator, Biased | Unbiased | Moderated),
            Arity::TwoSample => matches!(estimator, Pooled | WelchBiased | WelchUnbiased | Moderated),
        };
        if ok {
            Ok(StatisticKind { arity, estimator })
        } else {
            Err(EngineError::InvalidKind(format!("{estimator:?} estimator with {arity:?} layout")))
        }
    }

    pub fn arity(self) -> Arity {
        self.arity
    }

    pub fn estimator(self) -> Estimator {
        self.estimator
    }

    /// Ordinary one-sample statistic with the plain variance estimator
    /// (biased or Bessel-corrected), where `A = B * sigma^2`.
    pub fn is_ordinary_one_sample(self) -> bool {
        self.arity == Arity::OneSample && matches!(self.estimator, Estimator::Biased | Estimator::Unbiased)
    }

    pub fn token(self) -> &'static str {
        match (self.arity, self.estimator) {
            (Arity::OneSample, Estimator::Biased) => "one-biased",
            (Arity::OneSample, Estimator::Unbiased) => "one-unbiased",
            (Arity::OneSample, _) => "one-moderated",
            (_, Estimator::Pooled) => "two-pooled",
            (_, Estimator::WelchBiased) => "welch-biased",
            (_, Estimator::WelchUnbiased) => "welch-unbiased",
            (_, _) => "two-moderated",
        }
    }

    /// Closed-form variance adjustment `r^2` as a function of the sample
    /// sizes and, where needed, the prior and variances.
    pub fn r2_formula(self) -> &'static str {
        match (self.arity, self.estimator) {
            (Arity::OneSample, Estimator::Biased) => "1",
            (Arity::OneSample, Estimator::Unbiased) => "(n-1)/n",
            (Arity::OneSample, _) => "(d0+n-1)/(d0*s02/sigma2+n)",
            (_, Estimator::Pooled) => "(n-1)/n",
            (_, Estimator::WelchBiased) => "1",
            (_, Estimator::WelchUnbiased) => "(b_x*sigma2_x+b_y*sigma2_y)/(C_x*b_x*sigma2_x+C_y*b_y*sigma2_y)",
            (_, _) => "(d0+d_g)/(d0*s02/sigma2+C_xy*d_g)",
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for StatisticKind {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StatisticKind::ALL.into_iter().find(|k| k.token() == s).ok_or_else(|| {
            let known: Vec<_> = StatisticKind::ALL.iter().map(|k| k.token()).collect();
            EngineError::InvalidKind(format!("unknown statistic `{s}` (expected one of {})", known.join(", ")))
        })
    }
}

impl Serialize for StatisticKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.token())
    }
}

impl<'de> Deserialize<'de> for StatisticKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
