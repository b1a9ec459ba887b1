use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use evsched_bench::family;
use evsched_core::{compile, CompileOptions, Formulation, WindowMode};

fn compile_formulations(c: &mut Criterion) {
    let mut group = c.benchmark_group("compile");
    for n_max in [4, 8, 16] {
        let inst = family(8, n_max);
        for f in [Formulation::Legacy, Formulation::Compact] {
            group.bench_with_input(BenchmarkId::new(f.to_string(), n_max), &inst, |b, inst| {
                b.iter(|| compile(black_box(inst), CompileOptions::new(f, WindowMode::None)).unwrap())
            });
        }
    }
    group.finish();
}

fn export(c: &mut Criterion) {
    let inst = family(8, 8);
    let m = compile(&inst, CompileOptions::new(Formulation::Legacy, WindowMode::None))
        .unwrap()
        .model;
    c.bench_function("export_mps/legacy/8", |b| {
        b.iter(|| evsched_core::export_mps(black_box(&m)).unwrap())
    });
}

criterion_group!(benches, compile_formulations, export);
criterion_main!(benches);
