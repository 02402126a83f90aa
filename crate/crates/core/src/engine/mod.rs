//! Symbolic derivation of adjusted Edgeworth expansions for generalized
//! t-statistics and their numeric evaluation.

mod expansion;
mod kind;
mod ktable;
mod lambda;
mod sampling;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::algebra::{moments_to_cumulants, AlgebraError};
use crate::moments::{MomentEngine, MomentsError, DEFAULT_SLOT_CAP};

pub use expansion::{build_q, evaluate_cdf, Binding, BoundExpansion, ExpansionSet, QPolynomial};
pub use kind::{Arity, Estimator, StatisticKind};
pub use ktable::{extract_k_table, k_power, KTable};
pub use lambda::{lambda_form, LambdaForm};
pub use sampling::{a_mk, sampling_moment_one, sampling_moment_two};

/// Highest order derived unless overridden.
pub const DEFAULT_MAX_ORDER: u32 = 5;
/// Highest order that may be requested at all.
pub const HARD_MAX_ORDER: u32 = 6;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("{0}")]
    InvalidKind(String),
    #[error("moment order {m} outside 1..={} for expansion order {order}", order + 2)]
    MomentOrder { m: u32, order: u32 },
    #[error("expansion order {order} exceeds the configured maximum {max}")]
    OrderTooLarge { order: u32, max: u32 },
    #[error("cumulant {j} has a nonzero coefficient at n^(-{p}/2) where none may occur: {coefficient}")]
    StructuralZero { j: u8, p: i32, coefficient: String },
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("{terms} terms requested from an expansion of order {order}")]
    TermsExceedOrder { terms: u32, order: u32 },
    #[error("variance adjustment r^2 = {0} is not positive")]
    NonPositiveR2(f64),
    #[error("{0}")]
    NotOrdinary(String),
    #[error("malformed expansion document: {0}")]
    Json(String),
    #[error(transparent)]
    Moments(#[from] MomentsError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Derives and caches expansions per `(arity, order)`. The symbolic result
/// does not depend on the estimator; estimators differ only in the numbers
/// bound to `A`, `B` and the sample weights.
pub struct Deriver {
    engine: MomentEngine,
    max_order: u32,
    cache: Mutex<HashMap<(Arity, u32), Arc<ExpansionSet>>>,
}

impl Default for Deriver {
    fn default() -> Self {
        Deriver::new(DEFAULT_MAX_ORDER).expect("default order is within the hard cap")
    }
}

impl Deriver {
    pub fn new(max_order: u32) -> Result<Self, EngineError> {
        if max_order > HARD_MAX_ORDER {
            return Err(EngineError::OrderTooLarge { order: max_order, max: HARD_MAX_ORDER });
        }
        let cap = DEFAULT_SLOT_CAP.max(2 * max_order as usize + 2);
        Ok(Deriver { engine: MomentEngine::new(cap), max_order, cache: Mutex::new(HashMap::new()) })
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn moment_engine(&self) -> &MomentEngine {
        &self.engine
    }

    pub fn derive(&self, arity: Arity, order: u32) -> Result<Arc<ExpansionSet>, EngineError> {
        if order > self.max_order {
            return Err(EngineError::OrderTooLarge { order, max: self.max_order });
        }
        if let Some(es) = self.cache.lock().expect("cache lock").get(&(arity, order)) {
            return Ok(Arc::clone(es));
        }
        let es = Arc::new(self.compute(arity, order)?);
        self.cache.lock().expect("cache lock").insert((arity, order), Arc::clone(&es));
        Ok(es)
    }

    fn compute(&self, arity: Arity, order: u32) -> Result<ExpansionSet, EngineError> {
        let moments = (1..=order + 2)
            .into_par_iter()
            .map(|m| match arity {
                Arity::OneSample => sampling_moment_one(&self.engine, m, order),
                Arity::TwoSample => sampling_moment_two(&self.engine, m, order),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let cumulants = moments_to_cumulants(&moments)?;
        let table = extract_k_table(&cumulants, order)?;
        ExpansionSet::new(arity, table)
    }
}
