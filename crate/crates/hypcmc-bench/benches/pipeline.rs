use criterion::{criterion_group, criterion_main, Criterion};

use hypcmc_bench::{bump_phi, hemisphere_graph};
use hypcmc_core::mesh::{embed_graph, numeric_mean_curvature};
use hypcmc_core::operator::{jacobian, residual, ActiveSet};
use hypcmc_core::solver::{
    asymptotic_solve, AsymptoticProblem, SolverConfig, TruncationConfig,
};

fn bench_residual(c: &mut Criterion) {
    let u = hemisphere_graph(1.0 / 64.0);
    c.bench_function("residual 39x33", |b| {
        b.iter(|| residual(&u, 0.0).unwrap().max_norm)
    });
}

fn bench_jacobian(c: &mut Criterion) {
    let u = hemisphere_graph(1.0 / 64.0);
    let active = ActiveSet::full_interior(&u.grid);
    c.bench_function("jacobian 39x33", |b| {
        b.iter(|| jacobian(&u, 0.0, &active).unwrap().triplets.len())
    });
}

fn bench_curvature_oracle(c: &mut Criterion) {
    let u = hemisphere_graph(1.0 / 64.0);
    let mesh = embed_graph(&u).unwrap();
    c.bench_function("curvature oracle 39x33", |b| {
        b.iter(|| {
            numeric_mean_curvature(&mesh)
                .into_iter()
                .flatten()
                .count()
        })
    });
}

fn bench_asymptotic_solve(c: &mut Criterion) {
    let phi = bump_phi();
    let cfg = SolverConfig {
        truncation: TruncationConfig {
            eps: 1.0 / 16.0,
            transverse_extent: 2.0,
            z_hi: 2.0,
            h: 1.0 / 16.0,
        },
        ..SolverConfig::default()
    };
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    group.bench_function("asymptotic bump h=1/16 H=0.3", |b| {
        b.iter(|| {
            asymptotic_solve(
                &AsymptoticProblem {
                    phi: phi.clone(),
                    h_curv: 0.3,
                },
                &cfg,
            )
            .unwrap()
            .diagnostics
            .residual_max
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_residual,
    bench_jacobian,
    bench_curvature_oracle,
    bench_asymptotic_solve
);
criterion_main!(benches);
