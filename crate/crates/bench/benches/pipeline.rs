use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use horseshoe_core::integrator::{rk4_step, variational_step};
use horseshoe_core::poincare::Section;
use horseshoe_core::{Parameters, SecularModel};

fn model() -> SecularModel {
    SecularModel::new(Parameters::default()).unwrap()
}

fn vector_field(c: &mut Criterion) {
    let m = model();
    let x = m.params().datum;
    c.bench_function("vector_field", |b| b.iter(|| m.vector_field(black_box(&x)).unwrap()));
    c.bench_function("vf_jacobian", |b| b.iter(|| m.vf_jacobian(black_box(&x)).unwrap()));
}

fn steps(c: &mut Criterion) {
    let m = model();
    let x = m.params().datum.to_array();
    let ws = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
    c.bench_function("rk4_step", |b| b.iter(|| rk4_step(&m, black_box(&x), 786.0).unwrap()));
    c.bench_function("variational_step_4", |b| {
        b.iter(|| variational_step(&m, black_box(&x), black_box(&ws), 786.0).unwrap())
    });
}

fn return_map(c: &mut Criterion) {
    let section = Section::build(model()).unwrap();
    let seed = section.datum_seed();
    let mut group = c.benchmark_group("poincare");
    group.sample_size(10);
    group.bench_function("return_map", |b| b.iter(|| section.return_map(black_box(&seed)).unwrap()));
    group.finish();
}

criterion_group!(benches, vector_field, steps, return_map);
criterion_main!(benches);
