use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use eigengap::estimators::{ledoit_wolf, psa_spectrum};
use eigengap::experiments::{sample_gaussian, Scenario};
use eigengap::{
    escp_spectrum, pava_decreasing, penalty_gradient, EigengapKind, SolverConfig, Spectrum,
    DEFAULT_EPS,
};

/// Sample spectrum of an isotropic draw, as the solver sees it.
fn sample_spectrum(n: usize, p: usize) -> Vec<f64> {
    let scenario = Scenario::new("bench", n, Spectrum::constant(1.0, p).unwrap());
    sample_gaussian(&scenario, 0).sample_eigen().0
}

fn wobbly(p: usize) -> Vec<f64> {
    (0..p)
        .map(|j| (j as f64 * 0.618_034).fract() - j as f64 / p as f64)
        .collect()
}

fn pava(c: &mut Criterion) {
    let mut group = c.benchmark_group("pava");
    for p in [20, 200, 2000] {
        let x = wobbly(p);
        group.bench_with_input(BenchmarkId::from_parameter(p), &x, |b, x| {
            b.iter(|| pava_decreasing(black_box(x)))
        });
    }
    group.finish();
}

fn penalty(c: &mut Criterion) {
    let mut group = c.benchmark_group("penalty_gradient");
    for p in [20, 200, 2000] {
        let lambda = sample_spectrum(2 * p, p);
        for kind in [EigengapKind::Relative, EigengapKind::Absolute] {
            group.bench_with_input(BenchmarkId::new(kind.as_str(), p), &lambda, |b, l| {
                b.iter(|| penalty_gradient(black_box(l), kind))
            });
        }
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("escp_spectrum");
    group.sample_size(10);
    for (n, p) in [(40, 20), (200, 100)] {
        let ell = sample_spectrum(n, p);
        let alpha = (n as f64).ln();
        group.bench_with_input(BenchmarkId::from_parameter(p), &ell, |b, ell| {
            b.iter(|| {
                escp_spectrum(
                    black_box(ell),
                    n,
                    alpha,
                    EigengapKind::Relative,
                    &SolverConfig::default(),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn exact_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("psa_spectrum");
    group.sample_size(10);
    for p in [8, 12, 16] {
        let ell = sample_spectrum(2 * p, p);
        let alpha = ((2 * p) as f64).ln();
        group.bench_with_input(BenchmarkId::from_parameter(p), &ell, |b, ell| {
            b.iter(|| psa_spectrum(black_box(ell), 2 * p, alpha, 20, DEFAULT_EPS).unwrap())
        });
    }
    group.finish();
}

fn shrinkage(c: &mut Criterion) {
    let mut scenario = Scenario::preset("b").unwrap();
    scenario.repetitions = 1;
    let data = sample_gaussian(&scenario, 0);
    c.bench_function("ledoit_wolf/100", |b| {
        b.iter(|| {
            // fresh dataset so the cached covariance is recomputed
            let d = eigengap::Dataset::new(data.x().clone()).unwrap();
            ledoit_wolf(black_box(&d)).unwrap()
        })
    });
}

criterion_group!(benches, pava, penalty, solver, exact_search, shrinkage);
criterion_main!(benches);
