//! Tail diagnostic for truncated expansions: per side and per number of
//! correction terms, checks that the approximation is nondecreasing and stays
//! within `[0, 1]` on a grid, then picks the highest usable order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{BoundExpansion, EngineError};

/// Slack allowed for monotonicity and range checks.
pub const TOLERANCE: f64 = 1e-12;
/// Target accuracy of [`invert_cdf`] in probability.
pub const INVERSION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("{terms}-term expansion is not usable on the {side} side")]
    Unusable { terms: u32, side: Side },
    #[error("probability {p} is outside [{lo}, {hi}] attained on the usable {side} range")]
    Unattainable { p: f64, lo: f64, hi: f64, side: Side },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Scan points `0, +-step, +-2 step, ...` within `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub const DEFAULT_STEP: f64 = 0.01;
    pub const DEFAULT_HALF_WIDTH: f64 = 6.0;

    /// `[-6 r, 6 r]` with step `0.01`.
    pub fn default_for(r: f64) -> Grid {
        Grid { lo: -Self::DEFAULT_HALF_WIDTH * r, hi: Self::DEFAULT_HALF_WIDTH * r, step: Self::DEFAULT_STEP }
    }

    fn validate(&self) -> Result<(), DiagnosticsError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(DiagnosticsError::InvalidGrid(format!("step {} must be positive", self.step)));
        }
        if !(self.lo < 0.0 && self.hi > 0.0) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(DiagnosticsError::InvalidGrid(format!("need lo < 0 < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if (self.hi - self.lo) / self.step > 1e8 {
            return Err(DiagnosticsError::InvalidGrid("more than 1e8 grid points".into()));
        }
        Ok(())
    }

    /// Points from 0 outward on one side.
    pub fn side_points(&self, side: Side) -> Vec<f64> {
        let (limit, dir) = match side {
            Side::Left => (-self.lo, -1.0),
            Side::Right => (self.hi, 1.0),
        };
        let count = (limit / self.step * (1.0 + 1e-12)).floor() as usize;
        (0..=count).map(|i| dir * i as f64 * self.step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermCheck {
    pub terms: u32,
    pub usable: bool,
    /// Grid point where the first violation was seen.
    pub violation_x: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UsableOrder {
    pub left: u32,
    pub right: u32,
}

/// One side of a [`TailReport`] in its serialized form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideReport {
    pub side: Side,
    pub per_term: Vec<TermCheck>,
    pub usable_order: UsableOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub grid: Grid,
    pub left: Vec<TermCheck>,
    pub right: Vec<TermCheck>,
    /// Attained range of each usable expansion on each side, indexed like
    /// `left`/`right`: `(F at outer end, F at 0)` or `(F at 0, F at outer end)`.
    #[serde(skip)]
    ranges: Vec<[(f64, f64); 2]>,
}

impl TailReport {
    pub fn checks(&self, side: Side) -> &[TermCheck] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn usable(&self, side: Side, terms: u32) -> bool {
        self.checks(side).get(terms as usize).is_some_and(|c| c.usable)
    }

    pub fn usable_order(&self) -> UsableOrder {
        UsableOrder { left: usable_order(self, Side::Left), right: usable_order(self, Side::Right) }
    }

    /// Per-side documents `{"side", "per_term", "usable_order"}`.
    pub fn side_reports(&self) -> Vec<SideReport> {
        [Side::Left, Side::Right]
            .into_iter()
            .map(|side| SideReport { side, per_term: self.checks(side).to_vec(), usable_order: self.usable_order() })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "grid": self.grid,
            "reports": self.side_reports(),
            "usable_order": self.usable_order(),
        })
    }
}

/// Scans every truncation `0..=K` of `bound` on both sides of zero.
pub fn tail_scan(bound: &BoundExpansion, grid: Grid) -> Result<TailReport, DiagnosticsError> {
    grid.validate()?;
    let order = bound.order() as usize;
    let mut checks = [Vec::new(), Vec::new()];
    let mut ranges = vec![[(0.0, 0.0); 2]; order + 1];
    for (s, side) in [Side::Left, Side::Right].into_iter().enumerate() {
        let xs = grid.side_points(side);
        let values: Vec<Vec<f64>> = xs.par_iter().map(|&x| bound.cdf_all(x)).collect();
        for terms in 0..=order {
            let mut extreme = values[0][terms];
            let mut violation = None;
            for (i, v) in values.iter().enumerate() {
                let f = v[terms];
                let out_of_range = !(-TOLERANCE..=1.0 + TOLERANCE).contains(&f);
                let non_monotone = match side {
                    Side::Left => f > extreme + TOLERANCE,
                    Side::Right => f < extreme - TOLERANCE,
                };
                if out_of_range || non_monotone || f.is_nan() {
                    violation = Some(xs[i]);
                    break;
                }
                extreme = match side {
                    Side::Left => extreme.min(f),
                    Side::Right => extreme.max(f),
                };
            }
            let at0 = values[0][terms];
            let outer = values.last().map_or(at0, |v| v[terms]);
            ranges[terms][s] = match side {
                Side::Left => (outer, at0),
                Side::Right => (at0, outer),
            };
            checks[s].push(TermCheck { terms: terms as u32, usable: violation.is_none(), violation_x: violation });
        }
    }
    let [left, right] = checks;
    Ok(TailReport { grid, left, right, ranges })
}

/// Largest `k` such that every truncation `0..=k` is usable on `side`.
pub fn usable_order(report: &TailReport, side: Side) -> u32 {
    let checks = report.checks(side);
    let n = checks.iter().take_while(|c| c.usable).count();
    n.saturating_sub(1) as u32
}

/// Side whose scanned range contains the quantile for `p`.
pub fn side_for(bound: &BoundExpansion, p: f64, terms: u32) -> Result<Side, DiagnosticsError> {
    Ok(if p <= bound.cdf(0.0, terms)? { Side::Left } else { Side::Right })
}

/// Solves `F(x) = p` by bisection on the scanned range of `side`, where the
/// `terms`-term expansion was found monotone.
pub fn invert_cdf(
    bound: &BoundExpansion,
    report: &TailReport,
    p: f64,
    side: Side,
    terms: u32,
) -> Result<f64, DiagnosticsError> {
    if !report.usable(side, terms) {
        return Err(DiagnosticsError::Unusable { terms, side });
    }
    let (mut a, mut b) = match side {
        Side::Left => (report.grid.side_points(Side::Left).last().copied().unwrap_or(0.0), 0.0),
        Side::Right => (0.0, report.grid.side_points(Side::Right).last().copied().unwrap_or(0.0)),
    };
    let s = match side {
        Side::Left => 0,
        Side::Right => 1,
    };
    let (flo, fhi) = report.ranges[terms as usize][s];
    if !(p >= flo && p <= fhi) {
        return Err(DiagnosticsError::Unattainable { p, lo: flo, hi: fhi, side });
    }
    let f = |x: f64| bound.cdf(x, terms);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if f(mid)? < p {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let x = if (fa - p).abs() <= (fb - p).abs() { a } else { b };
    let err = (f(x)? - p).abs();
    if err > INVERSION_TOLERANCE {
        return Err(DiagnosticsError::Unattainable { p, lo: flo, hi: fhi, side });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::rat;
    use crate::engine::{Arity, Deriver};
    use crate::estimators::{one_sample_spec, MomentSet};

    fn bound(token: &str, moments: &MomentSet, order: u32) -> BoundExpansion {
        let es = Deriver::default().derive(Arity::OneSample, order).unwrap();
        let spec = one_sample_spec(token.parse().unwrap(), 10, &rat(3, 1), None).unwrap();
        es.bind(spec.n_f64(), &spec.binding(moments, None, order).unwrap()).unwrap()
    }

    fn normal(token: &str) -> BoundExpansion {
        bound(token, &MomentSet::normal(10, 3.0, 6).unwrap(), 4)
    }

    fn gamma() -> BoundExpansion {
        bound("one-biased", &MomentSet::from_cumulants(10, &[3.0, 6.0, 18.0, 72.0, 360.0]).unwrap(), 4)
    }

    #[test]
    fn zero_terms_always_usable() {
        for b in [normal("one-unbiased"), gamma()] {
            let report = tail_scan(&b, Grid::default_for(b.r())).unwrap();
            assert!(report.usable(Side::Left, 0) && report.usable(Side::Right, 0));
        }
    }

    #[test]
    fn usable_order_is_a_prefix() {
        let report = tail_scan(&gamma(), Grid::default_for(1.0)).unwrap();
        assert!(!report.usable(Side::Right, 1));
        assert_eq!(usable_order(&report, Side::Right), 0);
        let left = usable_order(&report, Side::Left);
        assert!((0..=left).all(|k| report.usable(Side::Left, k)));
    }

    #[test]
    fn invert_normal_quantiles() {
        let b = normal("one-biased");
        let report = tail_scan(&b, Grid::default_for(b.r())).unwrap();
        assert!(invert_cdf(&b, &report, 0.5, Side::Left, 0).unwrap().abs() < 1e-8);
        let x = invert_cdf(&b, &report, 0.975, Side::Right, 0).unwrap();
        assert!((x - 1.959964).abs() < 1e-5, "{x}");
    }

    #[test]
    fn invert_matches_student_t() {
        let b = normal("one-unbiased");
        let report = tail_scan(&b, Grid::default_for(b.r())).unwrap();
        let x = invert_cdf(&b, &report, 0.05, Side::Left, 2).unwrap();
        assert!((x + 1.833).abs() < 0.05, "{x}");
    }

    #[test]
    fn invert_then_evaluate() {
        let b = gamma();
        let report = tail_scan(&b, Grid::default_for(b.r())).unwrap();
        for p in [0.01, 0.05, 0.2, 0.4] {
            for terms in 0..=usable_order(&report, Side::Left) {
                let x = invert_cdf(&b, &report, p, Side::Left, terms).unwrap();
                assert!((b.cdf(x, terms).unwrap() - p).abs() < 1e-8);
            }
        }
        assert!(matches!(
            invert_cdf(&b, &report, 0.9, Side::Right, 1),
            Err(DiagnosticsError::Unusable { terms: 1, side: Side::Right })
        ));
    }

    #[test]
    fn refining_the_grid_never_restores_usability() {
        let b = gamma();
        let coarse = tail_scan(&b, Grid { lo: -6.0, hi: 6.0, step: 0.04 }).unwrap();
        let fine = tail_scan(&b, Grid { lo: -6.0, hi: 6.0, step: 0.02 }).unwrap();
        for side in [Side::Left, Side::Right] {
            for k in 0..=4 {
                if !coarse.usable(side, k) {
                    assert!(!fine.usable(side, k));
                }
            }
        }
    }

    #[test]
    fn symmetric_law_mirrors() {
        let b = bound("one-unbiased", &MomentSet::declared(10, vec![3.0, 0.0, 40.0, 0.0, 900.0]).unwrap(), 4);
        let report = tail_scan(&b, Grid::default_for(b.r())).unwrap();
        for (l, r) in report.left.iter().zip(&report.right) {
            assert_eq!(l.usable, r.usable);
            assert_eq!(l.violation_x.map(|x| -x), r.violation_x);
        }
    }

    #[test]
    fn bad_grids_rejected() {
        let b = gamma();
        for grid in [
            Grid { lo: -1.0, hi: 1.0, step: 0.0 },
            Grid { lo: -1.0, hi: 1.0, step: -0.1 },
            Grid { lo: 0.5, hi: 1.0, step: 0.1 },
        ] {
            assert!(matches!(tail_scan(&b, grid), Err(DiagnosticsError::InvalidGrid(_))));
        }
    }

    #[test]
    fn report_json_shape() {
        let report = tail_scan(&gamma(), Grid::default_for(1.0)).unwrap();
        let doc = report.to_json();
        assert_eq!(doc["reports"].as_array().unwrap().len(), 2);
        assert_eq!(doc["usable_order"]["right"], 0);
        assert_eq!(doc["reports"][1]["per_term"][1]["usable"], false);
    }
}
