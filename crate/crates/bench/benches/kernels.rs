use cavmotion_core::model::desk_scale_geometry;
use cavmotion_core::{
    bell_psi, concurrence_general, concurrence_x, residue_kernel, MemoryKernel, QuadratureConfig,
    QuadratureKernel, SystemParams,
};
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

fn kernels(c: &mut Criterion) {
    let params = SystemParams::new(0.1, 0.5, 1.0).validate().unwrap();
    let residue = residue_kernel(&params);
    let quadrature = QuadratureKernel::new(
        params,
        desk_scale_geometry(&params),
        QuadratureConfig::default().without_boundary_term(),
    )
    .unwrap();
    c.bench_function("residue_kernel/eval", |b| {
        b.iter(|| residue.eval(black_box(12.5)).unwrap())
    });
    c.bench_function("quadrature_kernel/eval", |b| {
        b.iter(|| quadrature.eval(black_box(12.5), 0.0).unwrap())
    });
}

fn concurrence(c: &mut Criterion) {
    let rho = cavmotion_core::assemble_two_qubit(&bell_psi(), Complex64::new(0.6, 0.3)).unwrap();
    c.bench_function("concurrence/general", |b| {
        b.iter(|| concurrence_general(black_box(&rho)).unwrap())
    });
    c.bench_function("concurrence/x_state", |b| {
        b.iter(|| concurrence_x(black_box(&rho)).unwrap())
    });
}

criterion_group!(benches, kernels, concurrence);
criterion_main!(benches);
