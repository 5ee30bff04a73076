use criterion::{criterion_group, criterion_main, Criterion};

use ks_bench::{sat3, unsat4};
use ks_core::instance::gen_planted;
use ks_core::oracle::{branch_and_bound_w, brute_force_w, DEFAULT_M_LIMIT};
use ks_core::reduction::{find_violation, ks_form_to_instance, nae3sat_to_ks_form, random_3cnf};
use ks_core::solver::solve;

fn solver(c: &mut Criterion) {
    let (inst, _) = gen_planted(5, 8, 4).expect("planted");
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("planted_d5_m16", |b| b.iter(|| solve(&inst, 0.1, 0.3, 4, None).expect("solve")));
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let (planted, _) = gen_planted(4, 8, 5).expect("planted");
    let (sat, _) = ks_form_to_instance(&sat3()).expect("instance");
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("exhaustive_m16", |b| b.iter(|| brute_force_w(&planted, DEFAULT_M_LIMIT).expect("oracle")));
    group.bench_function("branch_and_bound_sat3_m27", |b| b.iter(|| branch_and_bound_w(&sat).expect("oracle")));
    group.finish();
}

fn reduction(c: &mut Criterion) {
    let f = random_3cnf(60, 200, 6).expect("formula");
    c.bench_function("rewrite_and_build_v60_c200", |b| {
        b.iter(|| {
            let (g, _) = nae3sat_to_ks_form(&f).expect("rewrite");
            ks_form_to_instance(&g).expect("instance").0.len()
        })
    });
    let (inst, layout) = ks_form_to_instance(&unsat4()).expect("instance");
    let subset: Vec<usize> = (0..inst.len()).step_by(2).collect();
    c.bench_function("find_violation_unsat4", |b| {
        b.iter(|| find_violation(&layout, &inst, &subset).expect("violation"))
    });
}

criterion_group!(benches, solver, oracle, reduction);
criterion_main!(benches);
