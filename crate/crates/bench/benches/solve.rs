use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use evsched_core::harness::fixture_ex1;
use evsched_core::{compile, solve, CompileOptions, Formulation, Limits, WindowMode};

fn solve_ex1(c: &mut Criterion) {
    let inst = fixture_ex1();
    let mut group = c.benchmark_group("solve_ex1");
    group.sample_size(10);
    for f in [Formulation::Legacy, Formulation::Compact] {
        let m = compile(&inst, CompileOptions::new(f, WindowMode::None)).unwrap().model;
        group.bench_function(f.to_string(), |b| {
            b.iter(|| solve(black_box(&m), Limits::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solve_ex1);
criterion_main!(benches);
