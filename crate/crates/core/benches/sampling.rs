use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hammersley::env::{Dims, Params};
use hammersley::exec::Executor;
use hammersley::passage::{sample_passage_summary, RollingOptions};
use hammersley::rng::{substream, Stream};

fn sample_batch(exec: &Executor, n: usize, samples: usize) -> u64 {
    let law = Params::new(0.5, 0.5).unwrap().law();
    let dims = Dims::new(n, n).unwrap();
    exec.map(samples, |k| {
        let mut rng = substream(1, Stream::Environment, k as u64);
        sample_passage_summary(law, dims, RollingOptions::default(), &mut rng).g as u64
    })
    .into_iter()
    .sum()
}

fn backends(c: &mut Criterion) {
    let samples = 256;
    let mut group = c.benchmark_group("passage_samples");
    group.sample_size(10);
    for n in [64usize, 256] {
        group.throughput(Throughput::Elements(samples as u64));
        let seq = Executor::sequential();
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| sample_batch(&seq, n, samples))
        });
        let par = Executor::new(0);
        let label = format!("parallel_{}", par.workers());
        group.bench_with_input(BenchmarkId::new(label, n), &n, |b, &n| {
            b.iter(|| sample_batch(&par, n, samples))
        });
    }
    group.finish();
}

criterion_group!(benches, backends);
criterion_main!(benches);
