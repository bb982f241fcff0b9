use std::hint::black_box;
use std::path::Path;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use gully_core::analysis::{weighted_norm_estimate, NormRequest, SpaceTimeField};
use gully_core::model::Scenario;
use gully_core::solver::{assemble_diffusion, solver_config, BandedLu, FullSolver, ReducedSolver};

fn circle() -> Scenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/circle.toml");
    Scenario::load(&path).expect("shipped scenario").normalized()
}

fn chart_inverse(c: &mut Criterion) {
    let scenario = circle();
    let chart = scenario.chart(0).unwrap();
    let points: Vec<_> = (0..64)
        .map(|k| chart.forward(0.02 * k as f64, 0.05 * (k as f64 * 0.37).sin()).unwrap())
        .collect();
    c.bench_function("chart inverse, 64 points", |b| {
        b.iter(|| {
            for p in &points {
                black_box(chart.inverse(*p).unwrap());
            }
        })
    });
}

fn diffusion(c: &mut Criterion) {
    let scenario = circle();
    let grid = scenario.grid(0).unwrap();
    c.bench_function("assemble band laplacian", |b| b.iter(|| black_box(assemble_diffusion(&grid))));
    let op = assemble_diffusion(&grid);
    let x: Vec<f64> = (0..grid.len()).map(|n| (n as f64 * 0.01).sin()).collect();
    c.bench_function("apply band laplacian", |b| b.iter(|| black_box(op.apply(&x))));
    let fixed: Vec<bool> = (0..grid.len()).map(|n| grid.is_prescribed(n)).collect();
    c.bench_function("banded LU factor", |b| {
        b.iter(|| black_box(BandedLu::shifted_identity(&op, -1e-3, &fixed).unwrap()))
    });
    let lu = BandedLu::shifted_identity(&op, -1e-3, &fixed).unwrap();
    c.bench_function("banded LU solve", |b| {
        b.iter(|| {
            let mut y = x.clone();
            lu.solve_in_place(&mut y).unwrap();
            black_box(y)
        })
    });
}

fn steps(c: &mut Criterion) {
    let scenario = circle();
    let config = solver_config(&scenario);
    let full = FullSolver::new(Arc::new(scenario.grid(0).unwrap()), &scenario, config).unwrap();
    let state = full.initial();
    c.bench_function("band step", |b| b.iter(|| black_box(full.step(&state, 0).unwrap())));
    let axis = ReducedSolver::new(Arc::new(scenario.reduced_grid().unwrap()), &scenario, config).unwrap();
    let start = axis.initial();
    c.bench_function("axis step", |b| b.iter(|| black_box(axis.step(&start, 0).unwrap())));
}

fn norms(c: &mut Criterion) {
    let scenario = circle();
    let run = FullSolver::new(Arc::new(scenario.grid(0).unwrap()), &scenario, solver_config(&scenario))
        .unwrap()
        .run(400, 40)
        .unwrap();
    let field = SpaceTimeField::from_band(&run.snapshots).unwrap();
    let request = NormRequest::geometric(2.3, -0.2, field.diameter(), 8, 2000, 1).unwrap();
    c.bench_function("weighted norm, order 2+alpha", |b| {
        b.iter(|| black_box(weighted_norm_estimate(&field, &request).unwrap()))
    });
}

criterion_group!(benches, chart_inverse, diffusion, steps, norms);
criterion_main!(benches);
