use cavmotion_core::{residue_kernel, solve_aux, solve_history, SystemParams, TimeGrid};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn solvers(c: &mut Criterion) {
    let params = SystemParams::new(0.01, 0.0, 10.0);
    let kernel = residue_kernel(&params);
    let mut group = c.benchmark_group("solver");
    for steps in [1_000usize, 4_000] {
        let grid = TimeGrid::covering(steps as f64 * 1e-2, 1e-2).unwrap();
        group.bench_with_input(BenchmarkId::new("aux", steps), &grid, |b, &g| {
            b.iter(|| solve_aux(black_box(&kernel), g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("history", steps), &grid, |b, &g| {
            b.iter(|| solve_history(black_box(&kernel), g).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
