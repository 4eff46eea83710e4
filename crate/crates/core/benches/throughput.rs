use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use mvpois::simulation::empirical_correlation;
use mvpois::{
    backward_simulate, build_mixture, compute_all_extreme_measures, truncate, DiscreteMarginal,
    MixtureMeasure, TruncatedMarginal,
};
use rayon::ThreadPoolBuilder;

// Same work under a one-thread pool and a pool using every core. Build with
// `--no-default-features` to time the plain sequential code paths instead.

fn poissons(means: &[f64]) -> Vec<TruncatedMarginal> {
    means
        .iter()
        .map(|&m| truncate(&DiscreteMarginal::poisson(m, 1.0).unwrap(), 1e-6).unwrap())
        .collect()
}

fn thread_counts() -> Vec<usize> {
    let n = std::thread::available_parallelism().map_or(1, |n| n.get());
    if n > 1 { vec![1, n] } else { vec![1] }
}

fn extreme_measures(c: &mut Criterion) {
    let ms = poissons(&[3.0, 5.0, 7.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
    let mut g = c.benchmark_group("extreme_measures_j8");
    g.throughput(Throughput::Elements(1 << 7));
    for threads in thread_counts() {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(threads), &ms, |b, ms| {
            b.iter(|| pool.install(|| compute_all_extreme_measures(ms).unwrap()))
        });
    }
    g.finish();
}

fn mixture() -> MixtureMeasure {
    let ms = poissons(&[3.0, 5.0, 7.0]);
    let measures = compute_all_extreme_measures(&ms).unwrap();
    build_mixture(&[0.1, 0.2, 0.3, 0.4], &measures).unwrap()
}

fn simulation(c: &mut Criterion) {
    const PATHS: usize = 50_000;
    let mix = mixture();
    let mut g = c.benchmark_group("backward_simulate");
    g.throughput(Throughput::Elements(PATHS as u64));
    g.sample_size(20);
    for threads in thread_counts() {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(threads), &mix, |b, mix| {
            b.iter(|| pool.install(|| backward_simulate(mix, 1.0, PATHS, 42).unwrap()))
        });
    }
    g.finish();

    let paths = backward_simulate(&mix, 1.0, PATHS, 42).unwrap();
    let mut g = c.benchmark_group("empirical_correlation");
    g.throughput(Throughput::Elements(PATHS as u64));
    for threads in thread_counts() {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(threads), &paths, |b, p| {
            b.iter(|| pool.install(|| empirical_correlation(p, 0.5).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, extreme_measures, simulation);
criterion_main!(benches);
