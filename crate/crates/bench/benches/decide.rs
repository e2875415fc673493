use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use finhors::{decide_finiteness, enumerate_language, Budget, SearchConfig};
use finhors_bench::{load, PROGRAMS};

fn decide(c: &mut Criterion) {
    let mut group = c.benchmark_group("decide");
    let config = SearchConfig::default();
    for name in PROGRAMS {
        let el = load(name);
        group.bench_with_input(BenchmarkId::from_parameter(name), &el, |b, el| {
            b.iter(|| decide_finiteness(&el.store, el.root, &config).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    for name in PROGRAMS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter_batched(
                || load(name),
                |mut el| enumerate_language(&mut el.store, el.root, Budget::default()),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, decide, oracle);
criterion_main!(benches);
