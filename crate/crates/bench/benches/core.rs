use std::f64::consts::FRAC_PI_4;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use siba_core::dynamics::{integrate_adiabatic, integrate_full, simulate_periods};
use siba_core::experiments::{optimize_harmonic, sweep_eta_fixed_depth, wall_geometry, EtaDepthSweep, BALANCED_MINIMUM};
use siba_core::trap::{force, potential, trap_metrics};
use siba_core::{CavityMode, ModeProfile, TrapConfiguration};

fn single(eta: f64) -> TrapConfiguration {
    TrapConfiguration::single(CavityMode::resonant_at(ModeProfile::fundamental(), eta, FRAC_PI_4))
}

fn pointwise(c: &mut Criterion) {
    let cfg = single(50.0);
    c.bench_function("potential_and_force_1k", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for i in 0..1000 {
                let x = -1.5 + 3.0 * i as f64 / 999.0;
                s += potential(&cfg, x) + force(&cfg, x);
            }
            black_box(s)
        })
    });
    c.bench_function("trap_metrics", |b| b.iter(|| trap_metrics(black_box(&cfg), 0.5).unwrap()));
}

fn integrators(c: &mut Criterion) {
    let cfg = single(10.0);
    c.bench_function("verlet_10k_steps", |b| b.iter(|| integrate_adiabatic(&cfg, 0.0, 0.3, 1e-3, 10_000).unwrap()));
    c.bench_function("rk4_10k_steps", |b| b.iter(|| integrate_full(&cfg, 0.0, 0.3, 1e-3, 10_000, Some(50.0)).unwrap()));
    c.bench_function("adiabatic_10_periods", |b| b.iter(|| simulate_periods(&cfg, 0.0, 0.3, 10).unwrap()));
}

fn sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweeps");
    g.sample_size(10);
    let s = EtaDepthSweep { etas: vec![0.01, 1.0, 100.0], ..EtaDepthSweep::default() };
    g.bench_function("fig3_three_etas", |b| b.iter(|| sweep_eta_fixed_depth(&s).unwrap()));
    let base = CavityMode::new(ModeProfile::fundamental(), 1.0, 0.0);
    let cfg = wall_geometry(&base, 100.0, 0.0, BALANCED_MINIMUM);
    g.bench_function("optimize_harmonic", |b| b.iter(|| optimize_harmonic(&cfg, BALANCED_MINIMUM).unwrap()));
    g.finish();
}

criterion_group!(benches, pointwise, integrators, sweeps);
criterion_main!(benches);
