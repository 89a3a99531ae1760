use criterion::{black_box, criterion_group, criterion_main, Criterion};

use anharmonic::quadgrid::{integrate, Domain};
use anharmonic::{lpt, oracle, PotentialSpec, QuadratureConfig};
use anharmonic_bench::{matched_simple_trial, reference_specs};

fn bench_quadrature(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    c.bench_function("integrate/gaussian_half_line", |b| {
        b.iter(|| {
            integrate(
                |x| (-black_box(x) * x).exp(),
                Domain::HalfLinePositive,
                &cfg,
            )
            .unwrap()
        })
    });
}

fn bench_first_order_energy(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let spec = PotentialSpec::new(1.0, 2.0).unwrap();
    let trial = matched_simple_trial();
    c.bench_function("lpt/e1_simple_family", |b| {
        b.iter(|| lpt::compute_e1(black_box(&spec), &trial, &cfg).unwrap())
    });
}

fn bench_series(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let spec = PotentialSpec::new(1.0, 2.0).unwrap();
    let trial = matched_simple_trial();
    let mut group = c.benchmark_group("lpt/run_series");
    group.sample_size(10);
    group.bench_function("order2_simple_family", |b| {
        b.iter(|| lpt::run_series(black_box(&spec), &trial, 2, &cfg).unwrap())
    });
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for spec in reference_specs() {
        group.bench_function(
            format!("shoot/m2={},g={}", spec.m2(), spec.g()),
            |b| b.iter(|| oracle::solve_shoot(black_box(&spec), 0, 1e-9).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_quadrature,
    bench_first_order_energy,
    bench_series,
    bench_oracle
);
criterion_main!(benches);
