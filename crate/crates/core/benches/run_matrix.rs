//! Sequential versus thread-pool execution of the run matrix.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use defbal::harness::{run_matrix, BenchConfig, Category, Execution};

fn config(categories: &[Category]) -> BenchConfig {
    let mut cfg = BenchConfig::default_suite(42, "unused");
    cfg.instances.retain(|i| categories.contains(&i.category));
    cfg
}

fn matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_matrix");
    group.sample_size(10);
    for (label, cats) in [("pixel", &[Category::Pixel][..]), ("engine", &[Category::Engine][..])] {
        let cfg = config(cats);
        for (mode, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(mode, label), &cfg, |b, cfg| {
                b.iter(|| black_box(run_matrix(cfg, execution).expect("matrix")))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, matrix);
criterion_main!(benches);
