use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use metallic_lightlike::harness::{fixture, run, RunOptions};

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    for (name, samples) in [("ssi-curved-7", 32), ("ssi-example-1-adapted", 8)] {
        let m = fixture(name).expect("fixture exists");
        for sequential in [true, false] {
            let opts = RunOptions {
                samples: Some(samples),
                sequential,
                ..RunOptions::default()
            };
            let label = if sequential { "sequential" } else { "parallel" };
            group.bench_with_input(BenchmarkId::new(label, name), &opts, |b, opts| {
                b.iter(|| run(&m, opts))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sampling);
criterion_main!(benches);
