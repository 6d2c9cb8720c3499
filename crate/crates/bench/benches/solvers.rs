use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gmvi_core::problems::generate::{generate_lad, GenParams};
use gmvi_core::problems::make_lad;
use gmvi_core::{run, run_baseline, Averaging, BaselineConfig, Method, Mode, RngStream, SolverConfig};
use gmvi_core::sampling::Side;

/// Per-iteration cost of the two REM engines on sparse LAD as n grows.
fn rem_engines(c: &mut Criterion) {
    let mut group = c.benchmark_group("rem_lad");
    for n in [50usize, 200, 800] {
        let inst = make_lad(&generate_lad(&GenParams::new(n, n, 3.0, 7).density(4.0 / n as f64)).unwrap()).unwrap();
        let iters = 2000;
        for (name, mode) in [("dense", Mode::Dense), ("lazy", Mode::Lazy)] {
            // A stride past K keeps metric evaluation out of the timing.
            let cfg = SolverConfig::new(iters, 1).mode(mode).averaging(Averaging::SampledIndexSet).stride(iters + 1);
            group.bench_with_input(BenchmarkId::new(name, n), &cfg, |b, cfg| {
                b.iter(|| black_box(run(&inst, &inst.plan, cfg).unwrap().oracle_calls))
            });
        }
    }
    group.finish();
}

fn baselines(c: &mut Criterion) {
    let inst = make_lad(&generate_lad(&GenParams::new(200, 200, 3.0, 7).density(0.02)).unwrap()).unwrap();
    let mut group = c.benchmark_group("baseline_lad_200");
    for method in [Method::MirrorProx, Method::Popov] {
        let cfg = BaselineConfig::new(method, 20).stride(21);
        group.bench_function(method.name(), |b| b.iter(|| black_box(run_baseline(&inst, &cfg).unwrap().oracle_calls)));
    }
    group.finish();
}

fn alias_sampling(c: &mut Criterion) {
    let inst = make_lad(&generate_lad(&GenParams::new(1000, 1000, 3.0, 3).density(0.002)).unwrap()).unwrap();
    c.bench_function("alias_draw_1e4", |b| {
        let mut stream = RngStream::new(5);
        b.iter(|| {
            let mut acc = 0usize;
            for _ in 0..10_000 {
                acc ^= inst.plan.sample(Side::P, &mut stream);
            }
            black_box(acc)
        })
    });
}

criterion_group!(benches, rem_engines, baselines, alias_sampling);
criterion_main!(benches);
