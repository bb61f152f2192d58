use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ilwhodge_core::{hodge, ilw};

fn bench_extract_cg(c: &mut Criterion) {
    c.bench_function("extract_cg_8", |b| b.iter(|| hodge::extract_cg(black_box(8)).unwrap()));
}

fn bench_one_point(c: &mut Criterion) {
    c.bench_function("one_point_table_6", |b| {
        b.iter(|| hodge::one_point_table(black_box(6)).unwrap())
    });
}

fn bench_hamiltonian(c: &mut Criterion) {
    let mut group = c.benchmark_group("higher_hamiltonian");
    group.sample_size(10);
    group.bench_function("h2_genus3", |b| {
        b.iter(|| ilw::higher_hamiltonian(black_box(2), black_box(3)).unwrap())
    });
    group.bench_function("h3_genus2", |b| {
        b.iter(|| ilw::higher_hamiltonian(black_box(3), black_box(2)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_extract_cg, bench_one_point, bench_hamiltonian);
criterion_main!(benches);
