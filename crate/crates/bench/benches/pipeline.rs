use std::hint::black_box;

use chorefair::equilibrium::{approx_ceei, default_epsilon, exact_ceei, make_acyclic, SearchLimits};
use chorefair::surplus::{fair_and_efficient, SolveOptions};
use chorefair::three_agent::solve_three;
use chorefair::verify::{check_fpo, VerifyLimits};
use chorefair_bench::instance;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn equilibria(c: &mut Criterion) {
    let mut g = c.benchmark_group("equilibrium");
    for (n, m) in [(3, 6), (5, 10)] {
        let inst = instance(1, n, m, 1, 20);
        let eps = default_epsilon(&inst);
        g.bench_with_input(BenchmarkId::new("approx", format!("{n}x{m}")), &inst, |b, inst| {
            b.iter(|| approx_ceei(black_box(inst), &eps).unwrap())
        });
    }
    let small = instance(2, 3, 6, 1, 20);
    g.bench_function("exact/3x6", |b| {
        b.iter(|| exact_ceei(black_box(&small), SearchLimits::default()).unwrap())
    });
    let out = approx_ceei(&small, &default_epsilon(&small)).unwrap();
    g.bench_function("make_acyclic/3x6", |b| {
        b.iter(|| make_acyclic(&small, black_box(&out)).unwrap())
    });
    g.finish();
}

fn pipelines(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipeline");
    for (n, m) in [(3, 6), (5, 10)] {
        let inst = instance(3, n, m, 1, 20);
        g.bench_with_input(BenchmarkId::new("surplus", format!("{n}x{m}")), &inst, |b, inst| {
            b.iter(|| fair_and_efficient(black_box(inst), &SolveOptions::default()).unwrap())
        });
    }
    let three = instance(4, 3, 10, 0, 20);
    g.bench_function("three/3x10", |b| b.iter(|| solve_three(black_box(&three)).unwrap()));
    let inst = instance(5, 5, 10, 1, 20);
    let r = fair_and_efficient(&inst, &SolveOptions::default()).unwrap();
    g.bench_function("check_fpo/5x10", |b| {
        b.iter(|| check_fpo(&inst, black_box(&r.allocation), VerifyLimits::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, equilibria, pipelines);
criterion_main!(benches);
