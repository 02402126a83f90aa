use proptest::prelude::*;

use aee_core::algebra::rational::rat;
use aee_core::algebra::{
    central_moments_to_cumulants, cumulants_to_central_moments, cumulants_to_moments, moments_to_cumulants, Monomial,
};
use aee_core::{HalfPowerSeries, Rational, SparsePoly, Symbol};

const SYMBOLS: [Symbol; 6] =
    [Symbol::MomentX(2), Symbol::MomentX(3), Symbol::MomentY(4), Symbol::A, Symbol::Bx, Symbol::Lambda(3)];

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=9).prop_map(|(n, d)| rat(n, d))
}

fn monomial() -> impl Strategy<Value = Monomial> {
    prop::collection::vec((0..SYMBOLS.len(), -3i32..=3), 0..3)
        .prop_map(|fs| Monomial::from_raw(fs.into_iter().map(|(i, e)| (SYMBOLS[i], e))))
}

fn sparse_poly() -> impl Strategy<Value = SparsePoly> {
    prop::collection::vec((rational(), monomial()), 0..5)
        .prop_map(|terms| terms.into_iter().fold(SparsePoly::zero(), |acc, (c, m)| &acc + &SparsePoly::term(c, m)))
}

fn series(cap: i32) -> impl Strategy<Value = HalfPowerSeries<Rational>> {
    prop::collection::vec((0..=cap + 2, rational()), 0..6).prop_map(move |terms| {
        let mut s = HalfPowerSeries::zero(cap);
        for (p, c) in terms {
            s.add_at(p, c);
        }
        s
    })
}

proptest! {
    #[test]
    fn ring_laws(a in sparse_poly(), b in sparse_poly(), c in sparse_poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &SparsePoly::one(), a.clone());
    }

    #[test]
    fn render_parse_round_trip(a in sparse_poly()) {
        let text = a.to_string();
        let back: SparsePoly = text.parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn product_truncation_commutes(a in series(4), b in series(4)) {
        let wide = a.with_cap(20).mul(&b.with_cap(20)).unwrap().with_cap(4);
        prop_assert_eq!(a.mul(&b).unwrap(), wide);
    }

    #[test]
    fn exp_inverse(a in series(5)) {
        let mut s = HalfPowerSeries::zero(5);
        for (p, c) in a.terms() {
            if p >= 1 {
                s.add_at(p, c.clone());
            }
        }
        let prod = s.exp().unwrap().mul(&s.scale(&rat(-1, 1)).exp().unwrap()).unwrap();
        prop_assert_eq!(prod, HalfPowerSeries::one(5));
    }

    #[test]
    fn cumulant_round_trip(mu in prop::collection::vec(rational(), 1..=6)) {
        let raw: Vec<HalfPowerSeries<Rational>> =
            mu.iter().map(|m| HalfPowerSeries::single(0, m.clone(), 0)).collect();
        let back = cumulants_to_moments(&moments_to_cumulants(&raw).unwrap()).unwrap();
        prop_assert_eq!(back, raw);
    }

    #[test]
    fn numeric_central_round_trip(kappa in prop::collection::vec(-3.0f64..3.0, 1..=5)) {
        let mut k = kappa.clone();
        k[0] = k[0].abs() + 0.5;
        let back = central_moments_to_cumulants(&cumulants_to_central_moments(&k));
        for (x, y) in back.iter().zip(&k) {
            prop_assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()));
        }
    }
}

#[test]
fn fourth_cumulant_closed_form() {
    let raw: Vec<HalfPowerSeries<SparsePoly>> =
        (1..=4).map(|j| HalfPowerSeries::single(0, SparsePoly::var(Symbol::MomentX(j)), 0)).collect();
    let kappa = moments_to_cumulants(&raw).unwrap();
    let m = |j: u8| SparsePoly::var(Symbol::MomentX(j));
    let terms = [
        (rat(1, 1), m(4)),
        (rat(-4, 1), &m(3) * &m(1)),
        (rat(-3, 1), m(2).pow(2)),
        (rat(12, 1), &m(2) * &m(1).pow(2)),
        (rat(-6, 1), m(1).pow(4)),
    ];
    let expected = terms.iter().fold(SparsePoly::zero(), |acc, (c, t)| &acc + &t.scale(c));
    assert_eq!(kappa[3].coeff(0), expected);
}

#[test]
fn half_powers_of_a_render() {
    let p = SparsePoly::a_pow_halves(-3).scale(&rat(-1, 2));
    assert_eq!(p.to_string(), "-(1/2)*A^(-3/2)");
    assert_eq!("-(1/2)*A^(-3/2)".parse::<SparsePoly>().unwrap(), p);
}
