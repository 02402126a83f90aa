//! Adjusted Edgeworth expansions for generalized one- and two-sample
//! t-statistics.
//!
//! The expansion is derived symbolically in exact rational arithmetic: the
//! sampling moments of the statistic are expanded in `n^(-1/2)` with the
//! estimator constants `A`, `B` kept opaque, converted to cumulants, and
//! turned into Hermite-polynomial corrections of a normal CDF with variance
//! `r^2`. Numbers are bound only at evaluation time.
//!
//! ```no_run
//! use aee_core::engine::{Arity, Deriver};
//! use aee_core::estimators::{one_sample_spec, MomentSet};
//! use aee_core::algebra::rational;
//!
//! let deriver = Deriver::default();
//! let es = deriver.derive(Arity::OneSample, 3).unwrap();
//! let kind = "one-unbiased".parse().unwrap();
//! let moments = MomentSet::from_cumulants(10, &[3.0, 6.0, 18.0, 72.0, 360.0]).unwrap();
//! let spec = one_sample_spec(kind, 10, &rational::from_f64(3.0).unwrap(), None).unwrap();
//! let bound = es.bind(spec.n_f64(), &spec.binding(&moments, None, 3).unwrap()).unwrap();
//! println!("{}", bound.cdf(-2.0, 3).unwrap());
//! ```

pub mod algebra;
pub mod diagnostics;
pub mod dist;
pub mod engine;
pub mod estimators;
pub mod mc;
pub mod moments;

pub use algebra::{HalfPowerSeries, Rational, SparsePoly, Symbol, UniPoly};
pub use diagnostics::{Grid, Side, TailReport};
pub use engine::{Arity, Binding, BoundExpansion, Deriver, Estimator, ExpansionSet, KTable, StatisticKind};
pub use estimators::{EstimatorSpec, ModeratedPrior, MomentInput, MomentSet};
pub use mc::{EmpiricalCdf, GeneratorSpec, SampleSizes};
pub use moments::{MomentEngine, MomentPolynomial};
