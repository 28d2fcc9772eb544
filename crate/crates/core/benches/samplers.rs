use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qloop::{
    build_loops, direct_estimate, metropolis_estimate, sample_events, DirectConfig, EventList, Execution, Graph,
    LoopDecomposition, LoopTracer, MetropolisConfig, Orientation, WeightSpec,
};

fn ell0(_: &EventList, dec: &LoopDecomposition) -> f64 {
    dec.length_through(0)
}

fn direct(c: &mut Criterion) {
    let graph = Graph::torus(&[4, 4]).unwrap();
    let spec = WeightSpec::uniform(2.0).unwrap();
    let mut group = c.benchmark_group("direct");
    group.sample_size(10);
    for execution in [Execution::Sequential, Execution::Parallel] {
        let config = DirectConfig {
            n_samples: 20_000,
            n_batches: 50,
            seed: 7,
            execution,
        };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{execution:?}")), &config, |b, config| {
            b.iter(|| direct_estimate(&graph, 1.0, 0.5, &spec, &[&ell0], config).unwrap())
        });
    }
    group.finish();
}

fn metropolis(c: &mut Criterion) {
    let graph = Graph::torus(&[4, 4]).unwrap();
    let spec = WeightSpec::uniform(2.0).unwrap();
    let mut group = c.benchmark_group("metropolis");
    group.sample_size(10);
    for execution in [Execution::Sequential, Execution::Parallel] {
        let config = MetropolisConfig {
            n_sweeps: 500,
            burn_in: 50,
            n_batches: 50,
            n_chains: 10,
            seed: 7,
            relabel: None,
            execution,
        };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{execution:?}")), &config, |b, config| {
            b.iter(|| metropolis_estimate(&graph, 1.0, 0.5, &spec, &[&ell0], config).unwrap())
        });
    }
    group.finish();
}

fn trace(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace");
    for beta in [1.0, 4.0] {
        let graph = Graph::torus(&[4, 4, 4]).unwrap();
        let omega = sample_events(&graph, beta, 0.5, &mut qloop::rng::stream(3, 0)).unwrap();
        group.bench_with_input(BenchmarkId::new("fresh", beta), &omega, |b, omega| {
            b.iter(|| build_loops(&graph, omega).unwrap())
        });
        let mut tracer = LoopTracer::new();
        let mut out = LoopDecomposition::default();
        group.bench_with_input(BenchmarkId::new("reused", beta), &omega, |b, omega| {
            b.iter(|| tracer.trace_into(&graph, omega, Orientation::Upward, &mut out))
        });
    }
    group.finish();
}

criterion_group!(benches, direct, metropolis, trace);
criterion_main!(benches);
