use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ioshock::diffusion::{
    link_cascade, production_cascade, sweep_all_seeds, ShockParams, SweepSpec,
};
use ioshock::iotable::SectorId;
use ioshock::synth::synthetic_table;

fn bench_cascades(c: &mut Criterion) {
    let table = synthetic_table("BENCH", 2005, 59, 0.6, 7);
    let high = ShockParams::new(0.6, 0.4).unwrap();
    let low = ShockParams::new(0.7, 0.1).unwrap();

    let mut group = c.benchmark_group("cascade_59");
    group.bench_function("link_single_seed_low_resilience", |b| {
        b.iter(|| link_cascade(black_box(&table), SectorId(0), low).unwrap())
    });
    group.bench_function("production_single_seed_low_resilience", |b| {
        b.iter(|| production_cascade(black_box(&table), SectorId(0), low).unwrap())
    });
    group.bench_function("link_sweep_high_resilience", |b| {
        b.iter(|| sweep_all_seeds(black_box(&table), &SweepSpec::LinkCascade(high)))
    });
    group.bench_function("production_sweep_high_resilience", |b| {
        b.iter(|| sweep_all_seeds(black_box(&table), &SweepSpec::ProductionCascade(high)))
    });
    group.bench_function("demand_sweep", |b| {
        b.iter(|| {
            sweep_all_seeds(
                black_box(&table),
                &SweepSpec::Demand { shock_size: 1.0 },
            )
        })
    });
    group.finish();
}

criterion_group!(benches, bench_cascades);
criterion_main!(benches);
