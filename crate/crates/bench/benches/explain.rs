use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kxp_bench::{family, gridworld_case};
use kxp_core::explain::{method2, method3_minimal, method4, minimum_hitting_set, ExplainOptions, Target};
use kxp_core::queries::explanation_query_multi;
use kxp_core::verifier::{solve, SolveOptions};
use kxp_core::{MaskRole, Semantics, StepMask};

fn verifier(c: &mut Criterion) {
    let case = gridworld_case(3);
    let mut mask = StepMask::full(MaskRole::Explanation, 3, 8);
    mask.steps[0].clear();
    let u = explanation_query_multi(&case.sys, &case.net, &case.exec, &mask, Semantics::Weak).unwrap();
    c.bench_function("solve/gridworld k=3, step 1 free", |b| {
        b.iter(|| solve(black_box(&u.query), &SolveOptions::default()).unwrap())
    });
}

fn methods(c: &mut Criterion) {
    let opts = ExplainOptions::default();
    let mut group = c.benchmark_group("methods");
    group.sample_size(10);
    for k in 1..=3 {
        let case = gridworld_case(k);
        group.bench_with_input(BenchmarkId::new("method2", k), &case, |b, x| {
            b.iter(|| method2(&x.sys, &x.net, &x.exec, Target::Minimal, &opts).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("method3_minimal", k), &case, |b, x| {
            b.iter(|| method3_minimal(&x.sys, &x.net, &x.exec, &opts).unwrap())
        });
    }
    let case = gridworld_case(2);
    group.bench_function("method4/2", |b| b.iter(|| method4(&case.sys, &case.net, &case.exec, &opts).unwrap()));
    group.finish();
}

fn hitting_sets(c: &mut Criterion) {
    let fam = family(24, 40);
    c.bench_function("mhs/24 elements, 40 sets", |b| b.iter(|| minimum_hitting_set(black_box(&fam)).unwrap()));
}

criterion_group!(benches, verifier, methods, hitting_sets);
criterion_main!(benches);
