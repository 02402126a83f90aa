use std::fs;
use std::path::Path;

use aee_core::algebra::rational;
use aee_core::engine::{Arity, BoundExpansion, ExpansionSet};
use aee_core::estimators::{central_moments_from_data, one_sample_spec, two_sample_spec};
use aee_core::{EstimatorSpec, ModeratedPrior, MomentInput, MomentSet, StatisticKind};

use crate::args::InputArgs;
use crate::error::Failure;

/// Moments and estimator constants for one evaluation request.
pub struct Problem {
    pub spec: EstimatorSpec,
    pub x: MomentSet,
    pub y: Option<MomentSet>,
}

impl Problem {
    pub fn load(kind: StatisticKind, input: &InputArgs, order: u32) -> Result<Self, Failure> {
        let need = order as usize + 2;
        let (x, y) = match (&input.data, &input.moments) {
            (Some(path), None) => {
                let x = central_moments_from_data(&read_column(path, input.col.as_deref())?, need)?;
                let y = match &input.data_y {
                    Some(p) => Some(central_moments_from_data(&read_column(p, input.col.as_deref())?, need)?),
                    None => None,
                };
                (x, y)
            }
            (None, Some(path)) => match MomentInput::from_json(&read_text(path)?)? {
                MomentInput::One(x) => (x, None),
                MomentInput::Two(x, y) => (x, Some(y)),
            },
            _ => return Err(Failure::Config("give exactly one of --data or --moments".into())),
        };
        let prior = prior(input.d0, input.s02)?;
        Problem::new(kind, x, y, prior.as_ref(), input.equal_variance)
    }

    pub fn new(
        kind: StatisticKind,
        x: MomentSet,
        y: Option<MomentSet>,
        prior: Option<&ModeratedPrior>,
        equal_variance: bool,
    ) -> Result<Self, Failure> {
        let s2 = |m: &MomentSet| {
            rational::from_f64(m.sigma2())
                .ok_or_else(|| Failure::Compute(format!("variance {} is not finite", m.sigma2())))
        };
        let spec = match (kind.arity(), &y) {
            (Arity::OneSample, None) => one_sample_spec(kind, x.n_obs(), &s2(&x)?, prior)?,
            (Arity::TwoSample, Some(ym)) => {
                two_sample_spec(kind, x.n_obs(), ym.n_obs(), &s2(&x)?, &s2(ym)?, prior, equal_variance)?
            }
            (Arity::OneSample, Some(_)) => {
                return Err(Failure::Config(format!("{kind} takes one sample but two were given")))
            }
            (Arity::TwoSample, None) => {
                return Err(Failure::Config(format!("{kind} needs a second sample (--data-y or \"x\"/\"y\" moments)")))
            }
        };
        Ok(Problem { spec, x, y })
    }

    pub fn bind(&self, es: &ExpansionSet) -> Result<BoundExpansion, Failure> {
        let env = self.spec.binding(&self.x, self.y.as_ref(), es.order())?;
        Ok(es.bind(self.spec.n_f64(), &env)?)
    }
}

pub fn prior(d0: Option<f64>, s02: Option<f64>) -> Result<Option<ModeratedPrior>, Failure> {
    match (d0, s02) {
        (Some(d0), Some(s02)) => Ok(Some(ModeratedPrior::from_f64(d0, s02)?)),
        (None, None) => Ok(None),
        _ => Err(Failure::Config("--d0 and --s02 go together".into())),
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

/// One numeric column of a CSV file. A first row whose selected field is not
/// a number is taken as the header.
pub fn read_column(path: &Path, col: Option<&str>) -> Result<Vec<f64>, Failure> {
    let text = read_text(path)?;
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut records = reader.records();
    let bad = |msg: String| Failure::Config(format!("{}: {msg}", path.display()));
    let first = match records.next() {
        Some(r) => r.map_err(|e| bad(e.to_string()))?,
        None => return Err(bad("no rows".into())),
    };
    let index_col = col.and_then(|c| c.parse::<usize>().ok());
    let has_header = first.get(index_col.unwrap_or(0)).is_some_and(|f| f.parse::<f64>().is_err())
        || (col.is_some() && index_col.is_none());
    let idx = match (col, index_col) {
        (_, Some(i)) => i,
        (None, None) => 0,
        (Some(name), None) => {
            first.iter().position(|h| h == name).ok_or_else(|| bad(format!("no column named `{name}`")))?
        }
    };
    if col.is_none() && first.len() > 1 {
        return Err(bad(format!("{} columns; choose one with --col", first.len())));
    }
    let mut values = Vec::new();
    let rows = std::iter::once(Ok(first)).chain(records).skip(usize::from(has_header));
    for (i, row) in rows.enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let line = i + 1 + usize::from(has_header);
        let field = row.get(idx).ok_or_else(|| bad(format!("line {line} has no column {idx}")))?;
        if field.is_empty() {
            continue;
        }
        let v = field.parse::<f64>().map_err(|_| bad(format!("line {line}: `{field}` is not a number")))?;
        values.push(v);
    }
    Ok(values)
}
