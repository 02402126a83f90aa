use criterion::{criterion_group, criterion_main, Criterion};

use aee_core::algebra::rational;
use aee_core::diagnostics::tail_scan;
use aee_core::estimators::one_sample_spec;
use aee_core::{Arity, Deriver, Grid, MomentSet};

fn evaluate(c: &mut Criterion) {
    let es = Deriver::default().derive(Arity::OneSample, 4).unwrap();
    let kind = "one-unbiased".parse().unwrap();
    let ms = MomentSet::from_cumulants(10, &[3.0, 6.0, 18.0, 72.0, 360.0]).unwrap();
    let spec = one_sample_spec(kind, 10, &rational::from_f64(3.0).unwrap(), None).unwrap();
    let env = spec.binding(&ms, None, 4).unwrap();

    c.bench_function("bind order 4", |b| b.iter(|| es.bind(spec.n_f64(), &env).unwrap()));
    let bound = es.bind(spec.n_f64(), &env).unwrap();
    c.bench_function("cdf_all", |b| b.iter(|| bound.cdf_all(std::hint::black_box(-1.3))));
    c.bench_function("tail_scan default grid", |b| b.iter(|| tail_scan(&bound, Grid::default_for(bound.r())).unwrap()));
}

criterion_group!(benches, evaluate);
criterion_main!(benches);
