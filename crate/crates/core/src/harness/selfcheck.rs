//! Randomized invariant checks with seeded generators.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{assemble_two_qubit, DensityMatrix4, EIGENVALUE_FLOOR};
use crate::entanglement::{concurrence_general, concurrence_x};
use crate::kernel::residue_kernel;
use crate::model::SystemParams;
use crate::volterra::{solve_aux, TimeGrid, CONTRACTIVITY_TOL};

pub const TRACE_TOL: f64 = 1e-12;
pub const CONCURRENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub name: &'static str,
    pub trials: usize,
    pub violations: usize,
    /// Largest deviation seen, in the units of the check.
    pub worst: f64,
    pub tolerance: f64,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Mixed state `AA†/tr(AA†)` of random rank.
pub fn random_density(rng: &mut impl Rng) -> DensityMatrix4 {
    let rank = rng.random_range(1..=4);
    let mut a = Matrix4::<Complex64>::zeros();
    for j in 0..rank {
        for i in 0..4 {
            a[(i, j)] = cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let m = a * a.adjoint();
    let m = m / m.trace();
    DensityMatrix4::new((m + m.adjoint()) * cx(0.5, 0.0)).expect("valid by construction")
}

/// X state with populations on the simplex and coherences within the
/// positivity bounds.
pub fn random_x_state(rng: &mut impl Rng) -> DensityMatrix4 {
    let mut w: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let c14 = Complex64::from_polar(
        rng.random::<f64>() * (w[0] * w[3]).sqrt(),
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    let c23 = Complex64::from_polar(
        rng.random::<f64>() * (w[1] * w[2]).sqrt(),
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    let mut m = Matrix4::from_diagonal(&nalgebra::Vector4::from(w.map(|x| cx(x, 0.0))));
    m[(0, 3)] = c14;
    m[(3, 0)] = c14.conj();
    m[(1, 2)] = c23;
    m[(2, 1)] = c23.conj();
    DensityMatrix4::new(m).expect("valid by construction")
}

/// Haar-distributed single-qubit unitary (up to a global phase).
pub fn random_unitary2(rng: &mut impl Rng) -> Matrix2<Complex64> {
    let u: f64 = rng.random();
    let (a, b, phase): (f64, f64, f64) = (
        rng.random_range(0.0..std::f64::consts::TAU),
        rng.random_range(0.0..std::f64::consts::TAU),
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    let (c, s) = (u.sqrt(), (1.0 - u).sqrt());
    let alpha = Complex64::from_polar(c, a);
    let beta = Complex64::from_polar(s, b);
    let g = Complex64::from_polar(1.0, phase);
    Matrix2::new(alpha, beta, -beta.conj() * g, alpha.conj() * g)
}

fn random_amplitude(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(
        rng.random::<f64>().sqrt(),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

/// Trace and positivity of the two-qubit map on random states and
/// amplitudes.
pub fn density_invariants(rng: &mut impl Rng, trials: usize) -> InvariantReport {
    let mut report = InvariantReport {
        name: "density matrix trace and positivity",
        trials,
        violations: 0,
        worst: 0.0,
        tolerance: TRACE_TOL,
    };
    for _ in 0..trials {
        let rho0 = if rng.random() {
            random_density(rng)
        } else {
            random_x_state(rng)
        };
        let rho = assemble_two_qubit(&rho0, random_amplitude(rng)).expect("|c| ≤ 1");
        let trace_err = (rho.trace() - 1.0).norm();
        let min_eig = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        report.worst = report.worst.max(trace_err).max(-min_eig);
        if trace_err > TRACE_TOL || min_eig < EIGENVALUE_FLOOR {
            report.violations += 1;
        }
    }
    report
}

/// General and X-state concurrence agree on random X states.
pub fn path_equivalence(rng: &mut impl Rng, trials: usize) -> InvariantReport {
    let mut report = InvariantReport {
        name: "concurrence path equivalence",
        trials,
        violations: 0,
        worst: 0.0,
        tolerance: CONCURRENCE_TOL,
    };
    for _ in 0..trials {
        let rho = random_x_state(rng);
        let d = match (concurrence_general(&rho), concurrence_x(&rho)) {
            (Ok(a), Ok(b)) => (a.value - b.value).abs(),
            _ => f64::INFINITY,
        };
        report.worst = report.worst.max(d);
        if !(d <= CONCURRENCE_TOL) {
            report.violations += 1;
        }
    }
    report
}

/// Concurrence is unchanged by `U_A ⊗ U_B`.
pub fn local_unitary_invariance(rng: &mut impl Rng, trials: usize) -> InvariantReport {
    let mut report = InvariantReport {
        name: "local unitary invariance",
        trials,
        violations: 0,
        worst: 0.0,
        tolerance: CONCURRENCE_TOL,
    };
    for k in 0..trials {
        let rho = if k % 2 == 0 {
            random_density(rng)
        } else {
            random_x_state(rng)
        };
        let u = random_unitary2(rng).kronecker(&random_unitary2(rng));
        let m = u * rho.matrix() * u.adjoint();
        let d = match DensityMatrix4::new((m + m.adjoint()) * cx(0.5, 0.0)) {
            Ok(rotated) => match (concurrence_general(&rho), concurrence_general(&rotated)) {
                (Ok(a), Ok(b)) => (a.value - b.value).abs(),
                _ => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        };
        report.worst = report.worst.max(d);
        if !(d <= CONCURRENCE_TOL) {
            report.violations += 1;
        }
    }
    report
}

/// `|C̃(t)| ≤ 1` for the auxiliary solver over random parameters.
pub fn contractivity(rng: &mut impl Rng, trials: usize, t_max: f64, dt: f64) -> InvariantReport {
    let mut report = InvariantReport {
        name: "amplitude contractivity",
        trials,
        violations: 0,
        worst: 0.0,
        tolerance: CONTRACTIVITY_TOL,
    };
    let grid = TimeGrid::covering(t_max, dt).expect("positive horizon");
    for _ in 0..trials {
        let p = SystemParams::new(
            10f64.powf(rng.random_range(-3.0..0.3)),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..40.0),
        );
        let excess = match solve_aux(&residue_kernel(&p), grid) {
            Ok(traj) => traj.max_abs() - 1.0,
            Err(_) => f64::INFINITY,
        };
        report.worst = report.worst.max(excess);
        if !(excess <= CONTRACTIVITY_TOL) {
            report.violations += 1;
        }
    }
    report
}

/// All four suites from one seed.
pub fn invariant_suite(seed: u64, trials: usize) -> Vec<InvariantReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        density_invariants(&mut rng, trials),
        path_equivalence(&mut rng, trials),
        local_unitary_invariance(&mut rng, trials),
        contractivity(&mut rng, trials, 10.0, 1e-3),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let u = random_unitary2(&mut rng);
            let err = (u * u.adjoint() - Matrix2::identity()).norm();
            assert!(err < 1e-14);
        }
    }

    #[test]
    fn generators_produce_valid_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            assert!(random_x_state(&mut rng).is_x_state(0.0));
            let rho = random_density(&mut rng);
            assert!((rho.trace().re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn small_suite_passes() {
        for r in invariant_suite(42, 100) {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn suite_is_reproducible() {
        assert_eq!(invariant_suite(3, 20), invariant_suite(3, 20));
    }
}
