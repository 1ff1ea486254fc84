use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use evtensor::kernels::default_lookup;
use evtensor::{
    build_est, make_representation, GridConfig, KernelSpec, MlpWeights, Precision,
    RepresentationKind,
};
use evtensor_bench::sample_window;

fn kernels(c: &mut Criterion) {
    let window = sample_window(100_000);
    let mlp = KernelSpec::mlp(MlpWeights::trilinear_init());
    let lookup = KernelSpec::lookup(default_lookup(&mlp, 9, 1001).unwrap());
    let specs = [
        KernelSpec::Delta,
        KernelSpec::Trilinear,
        KernelSpec::exponential(1.0).unwrap(),
        KernelSpec::alpha(1.0).unwrap(),
        mlp,
        lookup,
    ];
    let mut group = c.benchmark_group("build_est");
    group.throughput(Throughput::Elements(window.len() as u64));
    for kernel in specs {
        let cfg = GridConfig::for_window(&window).with_kernel(kernel.clone());
        group.bench_with_input(
            BenchmarkId::from_parameter(kernel.name()),
            &cfg,
            |b, cfg| b.iter(|| build_est(&window, cfg).unwrap()),
        );
    }
    group.finish();
}

fn bins_and_precision(c: &mut Criterion) {
    let window = sample_window(100_000);
    let mut group = c.benchmark_group("trilinear_bins");
    group.throughput(Throughput::Elements(window.len() as u64));
    for bins in [2, 4, 9, 16] {
        for precision in [Precision::Float32, Precision::Float64] {
            let cfg = GridConfig::for_window(&window)
                .with_bins(bins)
                .with_precision(precision);
            let id = BenchmarkId::new(precision.name(), bins);
            group.bench_with_input(id, &cfg, |b, cfg| {
                b.iter(|| build_est(&window, cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn threads(c: &mut Criterion) {
    let window = sample_window(1_000_000);
    let mut group = c.benchmark_group("threads");
    group.sample_size(10);
    group.throughput(Throughput::Elements(window.len() as u64));
    for threads in [1, 2, 4] {
        let cfg = GridConfig::for_window(&window).with_threads(threads);
        group.bench_with_input(BenchmarkId::from_parameter(threads), &cfg, |b, cfg| {
            b.iter(|| build_est(&window, cfg).unwrap())
        });
    }
    group.finish();
}

fn representations(c: &mut Criterion) {
    let window = sample_window(100_000);
    let cfg = GridConfig::for_window(&window);
    let mut group = c.benchmark_group("representation");
    group.throughput(Throughput::Elements(window.len() as u64));
    for kind in RepresentationKind::ALL {
        group.bench_with_input(
            BenchmarkId::from_parameter(kind.name()),
            &kind,
            |b, &kind| b.iter(|| make_representation(&window, &cfg, kind).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(
    benches,
    kernels,
    bins_and_precision,
    threads,
    representations
);
criterion_main!(benches);
