use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phi_lab_bench::{ensemble, product};
use phi_lab_core::entropy::{check_operator_efron_stein, check_subadditivity, matrix_phi_entropy, operator_phi_entropy, Variant};
use phi_lab_core::ScalarFunction;

fn entropies(c: &mut Criterion) {
    let f = ScalarFunction::xlogx();
    let mut g = c.benchmark_group("entropy");
    for d in [2, 4, 8] {
        let e = ensemble(d, 8, 1);
        g.bench_with_input(BenchmarkId::new("trace", d), &d, |b, _| b.iter(|| matrix_phi_entropy(&f, black_box(&e)).unwrap()));
        g.bench_with_input(BenchmarkId::new("operator", d), &d, |b, _| {
            b.iter(|| operator_phi_entropy(&f, black_box(&e)).unwrap())
        });
    }
    g.finish();
}

fn tensorization(c: &mut Criterion) {
    let sq = ScalarFunction::square();
    let mut g = c.benchmark_group("tensorization");
    for sizes in [vec![2, 2], vec![3, 3, 3], vec![4, 4, 4]] {
        let p = product(4, &sizes, 2);
        let label = sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x");
        g.bench_with_input(BenchmarkId::new("subadditivity", &label), &p, |b, p| {
            b.iter(|| check_subadditivity(&sq, black_box(p), Variant::Operator, false).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("efron_stein", &label), &p, |b, p| {
            b.iter(|| check_operator_efron_stein(black_box(p)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, entropies, tensorization);
criterion_main!(benches);
