use num_traits::Zero;

use super::rational::{int, Rational};
use super::series::UniPoly;

/// Probabilists' Hermite polynomial `He_k`, built from
/// `He_{k+1}(y) = y He_k(y) - k He_{k-1}(y)`.
pub fn hermite(k: usize) -> UniPoly<Rational> {
    hermite_table(k).pop().expect("table has k+1 entries")
}

/// `[He_0, ..., He_k]`.
pub fn hermite_table(k: usize) -> Vec<UniPoly<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::with_capacity(k + 1);
    out.push(vec![int(1)]);
    if k >= 1 {
        out.push(vec![int(0), int(1)]);
    }
    for j in 1..k {
        let mut next = vec![Rational::zero(); j + 2];
        for (i, c) in out[j].iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in out[j - 1].iter().enumerate() {
            next[i] -= c * int(j as i64);
        }
        out.push(next);
    }
    out.into_iter().map(UniPoly::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Coeff;

    fn ints(v: &[i64]) -> UniPoly<Rational> {
        UniPoly::new(v.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn low_orders() {
        assert_eq!(hermite(0), ints(&[1]));
        assert_eq!(hermite(1), ints(&[0, 1]));
        assert_eq!(hermite(2), ints(&[-1, 0, 1]));
        assert_eq!(hermite(3), ints(&[0, -3, 0, 1]));
        assert_eq!(hermite(5), ints(&[0, 15, 0, -10, 0, 1]));
    }

    #[test]
    fn recurrence_through_twelve() {
        let t = hermite_table(13);
        let y = ints(&[0, 1]);
        for k in 1..=12 {
            let rhs = y.mul(&t[k]).sub(&t[k - 1].scale(&int(k as i64)));
            assert_eq!(t[k + 1], rhs, "k = {k}");
        }
    }

    #[test]
    fn derivative_definition_at_points() {
        // He_k(y) phi(y) = (-1)^k d^k/dy^k phi(y); check He_4 numerically
        // against the closed form y^4 - 6y^2 + 3.
        for y in [-2.0, -0.5, 0.0, 1.3] {
            let want: f64 = y * y * y * y - 6.0 * y * y + 3.0;
            assert!((hermite(4).eval_f64(y) - want).abs() < 1e-12);
        }
    }
}
