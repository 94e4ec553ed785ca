use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hvd::oracle::{sample_disk, verify_diagram_with};
use hvd::{build_hvd_with, Execution, KleinPoint};

fn sites(n: usize, seed: u64) -> Vec<KleinPoint> {
    sample_disk(0.95, n, seed)
        .into_iter()
        .map(|p| KleinPoint::new(p).unwrap())
        .collect()
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    for (n, k) in [(200, 1), (10, 3)] {
        let s = sites(n, 17);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, format!("n{n}_k{k}")), &s, |b, s| {
                b.iter(|| build_hvd_with(black_box(s), k, 1.0, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    let s = sites(12, 5);
    let d = build_hvd_with(&s, 2, 1.0, Execution::default()).unwrap();
    let mut group = c.benchmark_group("verify");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "10000"), |b| {
            b.iter(|| verify_diagram_with(black_box(&d), 10_000, 1, 1e-7, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, construction, verification);
criterion_main!(benches);
