use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use diamond_bench::{decoding_workload, noisy};
use diamond_core::decoder::Matcher;
use diamond_core::dem::graphlike_dem;
use diamond_core::gen::{build_memory_circuit, ExperimentSpec};
use diamond_core::noise::{apply_si1000, NoiseParams};
use diamond_core::sim::FrameSampler;
use diamond_core::{Basis, Family};

fn generation(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate");
    for d in [5usize, 9] {
        let spec = ExperimentSpec::protocol(Family::Diamond, d, Basis::Z);
        g.bench_with_input(BenchmarkId::new("diamond", d), &spec, |b, s| {
            b.iter(|| build_memory_circuit(s).unwrap())
        });
        let base = build_memory_circuit(&spec).unwrap();
        g.bench_with_input(BenchmarkId::new("si1000", d), &base, |b, c| {
            b.iter(|| apply_si1000(c.clone(), NoiseParams::si1000(1e-3)).unwrap())
        });
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample");
    for (family, d) in [(Family::Standard, 7), (Family::Diamond, 7)] {
        let n = noisy(family, d, 2e-3);
        let sampler = FrameSampler::new(&n).unwrap();
        g.throughput(Throughput::Elements(4096));
        g.bench_function(BenchmarkId::new(family.to_string(), d), |b| {
            b.iter(|| sampler.sample(4096, black_box(3)))
        });
    }
    g.finish();
}

fn extraction(c: &mut Criterion) {
    let mut g = c.benchmark_group("dem");
    g.sample_size(10);
    for d in [5usize, 7] {
        let n = noisy(Family::Diamond, d, 1e-3);
        g.bench_with_input(BenchmarkId::new("diamond", d), &n, |b, n| {
            b.iter(|| graphlike_dem(n).unwrap())
        });
    }
    g.finish();
}

fn decoding(c: &mut Criterion) {
    let mut g = c.benchmark_group("decode");
    g.sample_size(10);
    for (family, d, p) in [
        (Family::Standard, 5, 3e-3),
        (Family::Diamond, 5, 1e-3),
        (Family::Diamond, 7, 1e-3),
    ] {
        let (graph, shots) = decoding_workload(family, d, p, 512);
        g.throughput(Throughput::Elements(shots.len() as u64));
        let id = format!("{family}-d{d}");
        g.bench_function(BenchmarkId::new("single", &id), |b| {
            let mut m = Matcher::new(&graph);
            b.iter(|| shots.iter().map(|s| m.predict(s).unwrap()).fold(0, |a, x| a ^ x))
        });
        g.bench_function(BenchmarkId::new("two-pass", &id), |b| {
            let mut m = Matcher::new(&graph);
            b.iter(|| {
                shots
                    .iter()
                    .map(|s| m.decode_two_pass(s).unwrap().observables)
                    .fold(0, |a, x| a ^ x)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, generation, sampling, extraction, decoding);
criterion_main!(benches);
