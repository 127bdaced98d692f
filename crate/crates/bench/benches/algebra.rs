use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qanalytic::fock::{op_norm, rep_element};
use qanalytic::quotient::{canonical_lift, quotient_norm_l1, quotient_norm_l2};
use qanalytic::{
    AlgebraTuple, Complex64, Family, FockTruncation, MultiIndex, QElement, QParameter, SeminormSpec, SliceSet,
};

fn dense(n: usize, q: QParameter, deg: usize, cap: usize) -> QElement {
    let terms = MultiIndex::up_to_degree(n, deg)
        .into_iter()
        .enumerate()
        .map(|(i, k)| (k, Complex64::new(1.0 / (1 + i) as f64, 0.5)));
    QElement::from_terms(n, q, cap, terms).unwrap()
}

fn multiply(c: &mut Criterion) {
    let q = QParameter::new(0.8, 0.3).unwrap();
    let mut group = c.benchmark_group("multiply");
    for n in [2, 3] {
        let a = dense(n, q, 6, 12);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| black_box(a.multiply(a).unwrap()))
        });
    }
    group.finish();
}

fn jsr_partials(c: &mut Criterion) {
    let q = QParameter::new(1.0, std::f64::consts::FRAC_PI_4).unwrap();
    let mut group = c.benchmark_group("jsr_partials");
    group.sample_size(10);
    for family in [Family::Polydisk, Family::Ball] {
        let tuple = AlgebraTuple::quantum_generators(2, q);
        let spec = SeminormSpec::new(family, 0.9, 1.0, 1.0).unwrap();
        group.bench_function(family.name(), |b| {
            b.iter(|| black_box(tuple.partials(2.0, &spec, 200).unwrap()))
        });
    }
    group.finish();
}

fn quotient(c: &mut Criterion) {
    let q = QParameter::new(0.5, 0.9).unwrap();
    let slices = SliceSet::new(3, q, 5);
    let lift = canonical_lift(&MultiIndex::new(vec![2, 2, 1]), 5);
    let mut group = c.benchmark_group("quotient");
    group.bench_function("taylor", |b| {
        b.iter(|| black_box(quotient_norm_l1(&lift, 0.9, None, &slices).unwrap()))
    });
    group.bench_function("tau", |b| {
        b.iter(|| black_box(quotient_norm_l1(&lift, 0.9, Some(2.0), &slices).unwrap()))
    });
    group.bench_function("fiber-l2", |b| {
        b.iter(|| black_box(quotient_norm_l2(&lift, 0.9, &slices).unwrap()))
    });
    group.finish();
}

fn fock(c: &mut Criterion) {
    let q = QParameter::real(0.6).unwrap();
    let mut group = c.benchmark_group("fock_op_norm");
    group.sample_size(10);
    for cap in [10, 20] {
        let f = FockTruncation::new(2, 0.6, cap).unwrap();
        let m = rep_element(&dense(2, q, 3, 3), &f).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(cap), &m, |b, m| {
            b.iter(|| black_box(op_norm(m, &f).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, multiply, jsr_partials, quotient, fock);
criterion_main!(benches);
