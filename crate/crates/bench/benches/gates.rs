use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use polargate::analysis::thermal_phase_spread;
use polargate::{blockade_scan, extract_gate, PropagationOptions};
use polargate_bench::{co_blockade_params, co_direct};

fn bench_extract(c: &mut Criterion) {
    let built = co_direct();
    let opts = PropagationOptions::default();
    c.bench_function("extract_gate/direct", |b| {
        b.iter(|| extract_gate(black_box(&built.schedule), &built.system, &opts).unwrap())
    });
}

fn bench_scan(c: &mut Criterion) {
    let params = co_blockade_params();
    let opts = PropagationOptions::default();
    c.bench_function("blockade_scan/4_ratios", |b| {
        b.iter(|| blockade_scan(black_box(&params), &[10.0, 30.0, 100.0, 300.0], &opts).unwrap())
    });
}

fn bench_thermal(c: &mut Criterion) {
    let built = co_direct();
    let sigma = 0.005 * built.system.geometry.r;
    c.bench_function("thermal/10k", |b| {
        b.iter(|| thermal_phase_spread(black_box(&built), sigma, 10_000, 1).unwrap())
    });
}

criterion_group!(benches, bench_extract, bench_scan, bench_thermal);
criterion_main!(benches);
