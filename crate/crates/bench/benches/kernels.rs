use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ks_bench::random_spd;
use ks_core::instance::gen_random;
use ks_core::linalg::{eig_extremes, spd_solve};
use ks_core::sparsifier::SparsifierState;

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig_extremes");
    for d in [5, 10, 20] {
        let m = random_spd(d, 1);
        group.bench_with_input(BenchmarkId::from_parameter(d), &m, |b, m| b.iter(|| eig_extremes(black_box(m))));
    }
    group.finish();
}

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("spd_solve");
    for d in [5, 10, 20] {
        let m = random_spd(d, 2);
        let v = vec![1.0; d];
        group.bench_with_input(BenchmarkId::from_parameter(d), &m, |b, m| {
            b.iter(|| spd_solve(black_box(m), 0.05, black_box(&v)))
        });
    }
    group.finish();
}

fn sparsify(c: &mut Criterion) {
    let inst = gen_random(10, 500, 3).expect("instance");
    c.bench_function("sparsifier_stream_d10_m500", |b| {
        b.iter(|| {
            let mut s = SparsifierState::new(10, 0.25, 0.05).expect("state");
            for (i, v) in inst.vectors().enumerate() {
                s = s.observe(i, v, 0.5).expect("observe").0;
            }
            s.sample_count()
        })
    });
}

criterion_group!(benches, eigen, solve, sparsify);
criterion_main!(benches);
