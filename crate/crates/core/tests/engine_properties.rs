use proptest::prelude::*;

use aee_core::algebra::rational::{self, rat};
use aee_core::engine::{lambda_form, sampling_moment_one, Arity, Binding, Deriver, ExpansionSet};
use aee_core::estimators::{one_sample_spec, two_sample_spec, ModeratedPrior, MomentInput, MomentSet};
use aee_core::{SparsePoly, StatisticKind, Symbol};

fn kind(token: &str) -> StatisticKind {
    token.parse().unwrap()
}

fn zero_odd(p: &SparsePoly, syms: &[Symbol]) -> SparsePoly {
    syms.iter().fold(p.clone(), |acc, &s| acc.substitute(s, &SparsePoly::zero()).unwrap())
}

#[test]
fn first_correction_vanishes_without_skewness() {
    let deriver = Deriver::default();
    let one = deriver.derive(Arity::OneSample, 2).unwrap();
    let q1 = one.q_expanded(1).unwrap();
    assert!(q1.hermite.iter().all(|c| zero_odd(c, &[Symbol::MomentX(3)]).is_zero()));
    let two = deriver.derive(Arity::TwoSample, 2).unwrap();
    let q1 = two.q_expanded(1).unwrap();
    assert!(q1.hermite.iter().all(|c| zero_odd(c, &[Symbol::MomentX(3), Symbol::MomentY(3)]).is_zero()));
}

#[test]
fn standardized_mean_limit() {
    // B = 0 and A = sigma^2 leave the classical expansion of the standardized
    // mean: q1 = -l3 He2 / 6, q2 = -(l4 He3 / 24 + l3^2 He5 / 72).
    let es = Deriver::default().derive(Arity::OneSample, 2).unwrap();
    let (s2, mu3, mu4) = (4.0, 3.0, 60.0);
    let env = Binding::new()
        .with(Symbol::A, s2)
        .with(Symbol::Bx, 0.0)
        .with(Symbol::MomentX(2), s2)
        .with(Symbol::MomentX(3), mu3)
        .with(Symbol::MomentX(4), mu4);
    let bound = es.bind(25.0, &env).unwrap();
    let (l3, l4) = (mu3 / s2.powf(1.5), mu4 / (s2 * s2) - 3.0);
    assert!((bound.r() - 1.0).abs() < 1e-15);
    for y in [-2.5, -1.0, 0.3, 1.7] {
        let q1 = -l3 / 6.0 * (y * y - 1.0);
        let he3 = y * y * y - 3.0 * y;
        let he5 = y.powi(5) - 10.0 * y.powi(3) + 15.0 * y;
        let q2 = -(l4 / 24.0 * he3 + l3 * l3 / 72.0 * he5);
        assert!((bound.q(1).unwrap().eval(y) - q1).abs() < 1e-12);
        assert!((bound.q(2).unwrap().eval(y) - q2).abs() < 1e-12);
    }
}

#[test]
fn leading_moments_are_consistent() {
    let engine = Deriver::default();
    let e1 = sampling_moment_one(engine.moment_engine(), 1, 3).unwrap();
    let e2 = sampling_moment_one(engine.moment_engine(), 2, 3).unwrap();
    // E[theta] starts at n^(-1/2), E[theta^2] at mu2 / A.
    assert!(e1.coeff(0).is_zero());
    assert_eq!(e2.coeff(0), "mu[2]/A".parse::<SparsePoly>().unwrap());
    let es = engine.derive(Arity::OneSample, 3).unwrap();
    assert_eq!(es.r2(), e2.coeff(0));
    assert_eq!(es.k_table().get(1, 2), e1.coeff(1));
}

#[test]
fn lambda_route_agrees_with_general_route() {
    let deriver = Deriver::default();
    let es = deriver.derive(Arity::OneSample, 4).unwrap();
    let lf = lambda_form(&es, kind("one-biased")).unwrap();
    let kappa = [2.0, 1.5, 4.0, 3.0, 12.0];
    let ms = MomentSet::from_cumulants(12, &kappa).unwrap();
    let spec = one_sample_spec(kind("one-biased"), 12, &rat(2, 1), None).unwrap();
    let bound = es.bind(12.0, &spec.binding(&ms, None, 4).unwrap()).unwrap();
    let lambda = ms.lambda();
    for k in 1..=4 {
        for y in [-2.0, -0.5, 1.0, 2.5] {
            let a = bound.q(k).unwrap().eval(y);
            let b = lf.eval(k, &lambda, y).unwrap();
            assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "q{k}({y}): {a} vs {b}");
        }
    }
    assert!(lambda_form(&es, kind("one-moderated")).is_err());
}

#[test]
fn expansion_json_round_trip() {
    let es = Deriver::default().derive(Arity::TwoSample, 3).unwrap();
    let doc = es.to_json(true);
    let back = ExpansionSet::from_json(&doc).unwrap();
    assert_eq!(back.q(), es.q());
    assert_eq!(back.order(), 3);
    assert!(doc["k_table"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn estimator_invariants() {
    let s2 = rat(5, 2);
    let zero_prior = ModeratedPrior::new(rat(0, 1), rat(1, 1)).unwrap();
    let unbiased = one_sample_spec(kind("one-unbiased"), 8, &s2, None).unwrap();
    let moderated = one_sample_spec(kind("one-moderated"), 8, &s2, Some(&zero_prior)).unwrap();
    assert_eq!((&unbiased.a, &unbiased.b_x, &unbiased.r2), (&moderated.a, &moderated.b_x, &moderated.r2));

    let balanced = two_sample_spec(kind("welch-unbiased"), 7, 7, &s2, &rat(3, 1), None, false).unwrap();
    assert_eq!((balanced.weight_x.clone(), balanced.weight_y.clone()), (rat(1, 1), rat(1, 1)));

    // r^2 -> 1 at rate 1/n
    let prior = ModeratedPrior::new(rat(3, 1), rat(4, 1)).unwrap();
    for token in ["one-unbiased", "one-moderated"] {
        for n in [10u64, 100, 1000, 10000] {
            let spec = one_sample_spec(kind(token), n, &s2, Some(&prior)).unwrap();
            let gap = rational::to_f64(&spec.r2) - 1.0;
            assert!(gap.abs() * n as f64 <= 3.0, "{token} n={n}: {gap}");
        }
    }
    assert!(two_sample_spec(kind("two-pooled"), 5, 6, &s2, &rat(3, 1), None, false).is_err());
    assert!(one_sample_spec(kind("one-moderated"), 8, &s2, None).is_err());
}

#[test]
fn moment_input_round_trip() {
    let text =
        r#"{"x": {"n": 12, "mu": [2.0, 0.5, 13.0, 4.0, 90.0]}, "y": {"n": 9, "mu": [1.0, -0.2, 3.5, 0.0, 16.0]}}"#;
    let input = MomentInput::from_json(text).unwrap();
    let again = MomentInput::from_json(&input.to_json().to_string()).unwrap();
    assert_eq!(input, again);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_laws_give_symmetric_cdfs(
        s2 in 0.5f64..4.0,
        kurt in 0.0f64..3.0,
        k6 in -2.0f64..8.0,
        n in 5u64..40,
    ) {
        let es = Deriver::default().derive(Arity::OneSample, 4).unwrap();
        let ms = MomentSet::from_cumulants(n, &[s2, 0.0, kurt * s2 * s2, 0.0, k6 * s2.powi(3)]).unwrap();
        let spec = one_sample_spec(kind("one-unbiased"), n, &rational::from_f64(s2).unwrap(), None).unwrap();
        let bound = es.bind(spec.n_f64(), &spec.binding(&ms, None, 4).unwrap()).unwrap();
        for terms in 0..=4 {
            for x in [0.1, 0.7, 1.5, 2.9] {
                let s = bound.cdf(x, terms).unwrap() + bound.cdf(-x, terms).unwrap();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn swapping_samples_mirrors_the_cdf(
        sx in 0.5f64..3.0,
        sy in 0.5f64..3.0,
        g in -1.0f64..1.0,
        nx in 4u64..20,
        ny in 4u64..20,
    ) {
        let es = Deriver::default().derive(Arity::TwoSample, 3).unwrap();
        let x = MomentSet::from_cumulants(nx, &[sx, g * sx.powf(1.5), 0.5 * sx * sx, 0.0]).unwrap();
        let y = MomentSet::from_cumulants(ny, &[sy, -0.5 * g * sy.powf(1.5), sy * sy, 0.1]).unwrap();
        let k = kind("welch-unbiased");
        let r = |v: f64| rational::from_f64(v).unwrap();
        let fwd = two_sample_spec(k, nx, ny, &r(sx), &r(sy), None, false).unwrap();
        let rev = two_sample_spec(k, ny, nx, &r(sy), &r(sx), None, false).unwrap();
        let a = es.bind(fwd.n_f64(), &fwd.binding(&x, Some(&y), 3).unwrap()).unwrap();
        let b = es.bind(rev.n_f64(), &rev.binding(&y, Some(&x), 3).unwrap()).unwrap();
        for terms in 0..=3 {
            for t in [-1.8, -0.4, 0.9] {
                let s = a.cdf(t, terms).unwrap() + b.cdf(-t, terms).unwrap();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }
}

/// `E[theta^m]` over all count vectors of a three-point law.
fn brute_force_moment(law: &[(f64, f64); 3], n: usize, a: f64, b: f64, m: i32) -> f64 {
    let sigma2: f64 = law.iter().map(|(x, p)| x * x * p).sum();
    let nf = n as f64;
    let ln_fact = |k: usize| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let mut total = 0.0;
    for c0 in 0..=n {
        for c1 in 0..=(n - c0) {
            let counts = [c0, c1, n - c0 - c1];
            let mut ln_p = ln_fact(n);
            let (mut sum, mut sq) = (0.0, 0.0);
            for (c, (x, p)) in counts.iter().zip(law) {
                ln_p += *c as f64 * p.ln() - ln_fact(*c);
                sum += *c as f64 * x;
                sq += *c as f64 * x * x;
            }
            let mean = sum / nf;
            let s2 = a + b * (sq / nf - sigma2 - mean * mean);
            total += ln_p.exp() * (nf.sqrt() * mean / s2.sqrt()).powi(m);
        }
    }
    total
}

#[test]
fn truncation_error_decays_at_first_omitted_order() {
    let law: [(f64, f64); 3] = [(-1.0, 0.5), (0.0, 0.25), (2.0, 0.25)];
    let mu = |j: u8| law.iter().map(|(x, p)| x.powi(i32::from(j)) * p).sum::<f64>();
    let (a, b) = (1.5, 0.5);
    let deriver = Deriver::default();
    for (order, m) in [(1u32, 2u32), (2, 3), (3, 2), (3, 4)] {
        let series = sampling_moment_one(deriver.moment_engine(), m, order).unwrap();
        let env = |s: Symbol| match s {
            Symbol::A => Some(a),
            Symbol::Bx => Some(b),
            Symbol::MomentX(j) => Some(mu(j)),
            _ => None,
        };
        let gap = |n: usize| {
            let approx: f64 =
                series.terms().map(|(p, c)| c.eval(env).unwrap() * (n as f64).powf(-f64::from(p) / 2.0)).sum();
            (brute_force_moment(&law, n, a, b, m as i32) - approx).abs()
        };
        // successive doublings of n shrink the gap by 2^((K+1)/2)
        let rate = (gap(128) / gap(256)).log2();
        let target = f64::from(order + 1) / 2.0;
        assert!((rate - target).abs() < 0.1, "K={order} m={m}: {rate} vs {target}");
    }
}
