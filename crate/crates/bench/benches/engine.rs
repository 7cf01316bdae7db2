use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use nupbr_bench::{honest_models, models};
use nupbr_core::deflator::{build_after, build_before};
use nupbr_core::harness::gen::ModelGenParams;
use nupbr_core::harness::suites::{run_suite, SuiteId};
use nupbr_core::process::stop;
use nupbr_core::{azema, enlarge, nupbr_check};

fn bench_nupbr_check(c: &mut Criterion) {
    let mut group = c.benchmark_group("nupbr_check");
    for size in [6, 12, 24] {
        let set = models(16, 100, size, 4);
        group.bench_with_input(BenchmarkId::new("stopped_in_G", size), &set, |b, set| {
            b.iter(|| {
                for m in set {
                    let g = enlarge(&m.f, &m.tau);
                    black_box(nupbr_check(&stop(&m.s, &m.tau), &g, m.space.measure()).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bench_azema(c: &mut Criterion) {
    let set = models(32, 200, 24, 5);
    c.bench_function("azema", |b| {
        b.iter(|| {
            for m in &set {
                black_box(azema(&m.tau, &m.f, &m.space).unwrap());
            }
        })
    });
}

fn bench_deflators(c: &mut Criterion) {
    let set = honest_models(16, 300);
    let prepared: Vec<_> = set
        .iter()
        .map(|m| (m, azema(&m.tau, &m.f, &m.space).unwrap(), enlarge(&m.f, &m.tau)))
        .collect();
    c.bench_function("build_before", |b| {
        b.iter(|| {
            for (m, az, g) in &prepared {
                black_box(build_before(az, &m.tau, &m.f, g, &m.space).unwrap());
            }
        })
    });
    c.bench_function("build_after", |b| {
        b.iter(|| {
            for (m, az, g) in &prepared {
                black_box(build_after(az, &m.tau, &m.f, g, &m.space).ok());
            }
        })
    });
}

fn bench_suite(c: &mut Criterion) {
    let params = ModelGenParams::default();
    let mut group = c.benchmark_group("run_suite");
    group.sample_size(10);
    group.bench_function("main3_x20", |b| b.iter(|| black_box(run_suite(SuiteId::Main3, 20, 7, &params))));
    group.finish();
}

criterion_group!(benches, bench_nupbr_check, bench_azema, bench_deflators, bench_suite);
criterion_main!(benches);
