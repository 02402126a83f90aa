//! Moments `E[theta^m]` of the generalized t-statistic as truncated series in
//! `n^(-1/2)`.
//!
//! One sample: `theta = sqrt(n) Xbar [A + B (Xbar_s - Xbar^2)]^(-1/2)`.
//! Expanding the bracket binomially and regrouping the `Xbar^2` factors so
//! that each `rho` is only requested up to the powers that survive
//! truncation gives a double sum over `k` and `i`. The two-sample statistic
//! `sqrt(n) (Xbar - Ybar) [A + B_x(..) + B_y(..)]^(-1/2)` expands the same
//! way with a multinomial split of the bracket between the samples.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::rational::{self, Rational};
use crate::algebra::{HalfPowerSeries, Monomial, SparsePoly, Symbol};
use crate::moments::{MomentEngine, MomentPolynomial, Sample};

use super::EngineError;

/// Coefficient of `z^k` in `(1 + z)^(-m/2)`:
/// `(-1)^k / (k! 2^k) * prod_{j<k} (m + 2j)`.
pub fn a_mk(m: u32, k: u32) -> Rational {
    let mut num = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(m + 2 * j);
    }
    let den = rational::factorial(k) * (BigInt::one() << k);
    let r = Rational::new(num, den);
    if k % 2 == 1 {
        -r
    } else {
        r
    }
}

fn binom(n: u32, k: u32) -> Rational {
    Rational::from_integer(rational::binomial(n, k))
}

fn sign(i: u32) -> Rational {
    if i.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// Largest `v` in `n^(-v)` from a `rho` factor that can survive truncation at
/// `p = 2v - m <= order`.
fn v_limit(m: u32, order: u32) -> u32 {
    (order + m) / 2
}

fn check_range(m: u32, order: u32) -> Result<(), EngineError> {
    if m == 0 || m > order + 2 {
        return Err(EngineError::MomentOrder { m, order });
    }
    Ok(())
}

/// `E[theta^m]` for the one-sample statistic, keeping `n^(-p/2)` for
/// `p <= order`.
pub fn sampling_moment_one(
    engine: &MomentEngine,
    m: u32,
    order: u32,
) -> Result<HalfPowerSeries<SparsePoly>, EngineError> {
    check_range(m, order)?;
    let cap = order as i32;
    let v_max = v_limit(m, order);
    let mut out = HalfPowerSeries::zero(cap);
    for k in 0..=order {
        for i in 0..=k / 2 {
            let d = k - i;
            let c = a_mk(m, d) * sign(i) * binom(d, i);
            let mono = Monomial::from_raw([(Symbol::A, -(m as i32) - 2 * d as i32), (Symbol::Bx, d as i32)]);
            let rho = engine.rho_truncated((m + 2 * i) as usize, (k - 2 * i) as usize, Sample::X, v_max)?;
            for (v, coeff) in rho.terms() {
                let p = 2 * v as i32 - m as i32;
                if p <= cap {
                    out.add_at(p, coeff.mul_monomial(&c, &mono));
                }
            }
        }
    }
    Ok(out)
}

/// `E[theta^m]` for the two-sample statistic with `n = (n_x + n_y)/2`.
///
/// `rho` and `tau` are polynomials in `1/n_x` and `1/n_y`; with
/// `n_x^(-1) = b_x n^(-1)` each power `v` picks up `b_x^v` (resp. `b_y^v`).
pub fn sampling_moment_two(
    engine: &MomentEngine,
    m: u32,
    order: u32,
) -> Result<HalfPowerSeries<SparsePoly>, EngineError> {
    check_range(m, order)?;
    let cap = order as i32;
    let v_max = v_limit(m, order);
    let mut out = HalfPowerSeries::zero(cap);
    let weighted = |p: &MomentPolynomial, w: Symbol| -> Vec<(u32, SparsePoly)> {
        p.terms().map(|(v, c)| (v, c.mul_monomial(&Rational::one(), &Monomial::from_raw([(w, v as i32)])))).collect()
    };
    for j in 0..=m {
        let outer = sign(j) * binom(m, j);
        for k in 0..=order {
            for i in 0..=k / 2 {
                let d = k - i;
                let base = &outer * a_mk(m, d) * sign(i) * binom(d, i);
                for u in 0..=k - 2 * i {
                    for v in 0..=i {
                        let c = &base * binom(k - 2 * i, u) * binom(i, v);
                        if c.is_zero() {
                            continue;
                        }
                        let mono = Monomial::from_raw([
                            (Symbol::A, -(m as i32) - 2 * d as i32),
                            (Symbol::Bx, (d - u - v) as i32),
                            (Symbol::By, (u + v) as i32),
                        ]);
                        let rho = engine.rho_truncated(
                            (m - j + 2 * (i - v)) as usize,
                            (k - 2 * i - u) as usize,
                            Sample::X,
                            v_max,
                        )?;
                        if rho.is_zero() {
                            continue;
                        }
                        let tau = engine.rho_truncated((j + 2 * v) as usize, u as usize, Sample::Y, v_max)?;
                        let rho = weighted(&rho, Symbol::WeightX);
                        let tau = weighted(&tau, Symbol::WeightY);
                        for (v1, c1) in &rho {
                            let scaled = c1.mul_monomial(&c, &mono);
                            for (v2, c2) in &tau {
                                let p = 2 * (v1 + v2) as i32 - m as i32;
                                if p <= cap {
                                    out.add_at(p, &scaled * c2);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
