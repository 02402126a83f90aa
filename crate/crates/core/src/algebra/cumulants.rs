use super::rational::{self, Rational};
use super::series::{Coeff, HalfPowerSeries};
use super::AlgebraError;

/// Converts raw moments `mu'_1..mu'_M` into cumulants `kappa_1..kappa_M` with
/// `kappa_M = mu'_M - sum_{i=1}^{M-1} C(M-1, i-1) kappa_i mu'_{M-i}`.
pub fn moments_to_cumulants<C: Coeff>(moments: &[HalfPowerSeries<C>]) -> Result<Vec<HalfPowerSeries<C>>, AlgebraError> {
    let mut kappa: Vec<HalfPowerSeries<C>> = Vec::with_capacity(moments.len());
    for m in 1..=moments.len() {
        let mut acc = moments[m - 1].clone();
        for i in 1..m {
            let c = Rational::from_integer(rational::binomial((m - 1) as u32, (i - 1) as u32));
            let prod = kappa[i - 1].mul(&moments[m - i - 1])?.scale(&c);
            acc = acc.sub(&prod)?;
        }
        kappa.push(acc);
    }
    Ok(kappa)
}

/// Inverse of [`moments_to_cumulants`]:
/// `mu'_M = sum_{i=1}^{M} C(M-1, i-1) kappa_i mu'_{M-i}` with `mu'_0 = 1`.
pub fn cumulants_to_moments<C: Coeff>(
    cumulants: &[HalfPowerSeries<C>],
) -> Result<Vec<HalfPowerSeries<C>>, AlgebraError> {
    let Some(first) = cumulants.first() else {
        return Ok(Vec::new());
    };
    let cap = first.cap();
    let mut mu: Vec<HalfPowerSeries<C>> = vec![HalfPowerSeries::one(cap)];
    for m in 1..=cumulants.len() {
        let mut acc = HalfPowerSeries::zero(cap);
        for i in 1..=m {
            let c = Rational::from_integer(rational::binomial((m - 1) as u32, (i - 1) as u32));
            acc = acc.add(&cumulants[i - 1].mul(&mu[m - i])?.scale(&c))?;
        }
        mu.push(acc);
    }
    mu.remove(0);
    Ok(mu)
}

/// Numeric mean-zero conversion `mu_2..mu_M -> kappa_2..kappa_M` (indices
/// shifted: `mu[0]` is `mu_2`).
pub fn central_moments_to_cumulants(mu: &[f64]) -> Vec<f64> {
    let raw = |j: usize| -> f64 {
        match j {
            0 => 1.0,
            1 => 0.0,
            j => mu[j - 2],
        }
    };
    let m = mu.len() + 1;
    let mut kappa = vec![0.0; m + 1];
    for j in 2..=m {
        let mut acc = raw(j);
        for (i, k) in kappa.iter().enumerate().take(j).skip(1) {
            acc -= binom_f64(j - 1, i - 1) * k * raw(j - i);
        }
        kappa[j] = acc;
    }
    kappa.drain(..2);
    kappa
}

/// Numeric inverse of [`central_moments_to_cumulants`]; `kappa[0]` is `kappa_2`.
pub fn cumulants_to_central_moments(kappa: &[f64]) -> Vec<f64> {
    let m = kappa.len() + 1;
    let k = |i: usize| if i < 2 { 0.0 } else { kappa[i - 2] };
    let mut mu = vec![0.0; m + 1];
    mu[0] = 1.0;
    for j in 1..=m {
        mu[j] = (1..=j).map(|i| binom_f64(j - 1, i - 1) * k(i) * mu[j - i]).sum();
    }
    mu.drain(..2);
    mu
}

fn binom_f64(n: usize, k: usize) -> f64 {
    rational::to_f64(&Rational::from_integer(rational::binomial(n as u32, k as u32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::int;
    use crate::algebra::{SparsePoly, Symbol};

    fn sym(s: Symbol) -> HalfPowerSeries<SparsePoly> {
        HalfPowerSeries::single(0, SparsePoly::var(s), 0)
    }

    #[test]
    fn centered_low_orders() {
        let v = sym(Symbol::MomentX(2));
        let m3 = sym(Symbol::MomentX(3));
        let m4 = sym(Symbol::MomentX(4));
        let zero = HalfPowerSeries::zero(0);
        let k = moments_to_cumulants(&[zero, v.clone(), m3.clone(), m4.clone()]).unwrap();
        assert!(k[0].is_zero());
        assert_eq!(k[1], v);
        assert_eq!(k[2], m3);
        let want = m4.sub(&v.mul(&v).unwrap().scale(&int(3))).unwrap();
        assert_eq!(k[3], want);
    }

    #[test]
    fn numeric_gamma_cumulants() {
        // Gamma(3, 1): kappa_j = 3 (j-1)!.
        let kappa = [3.0, 6.0, 18.0, 72.0, 360.0];
        let mu = cumulants_to_central_moments(&kappa);
        assert_eq!(mu, vec![3.0, 6.0, 45.0, 252.0, 1935.0]);
        let back = central_moments_to_cumulants(&mu);
        for (a, b) in back.iter().zip(kappa) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
