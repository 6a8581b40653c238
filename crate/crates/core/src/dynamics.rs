//! Density matrices and time-local rates built from an amplitude trajectory.
//!
//! Each qubit undergoes the amplitude-damping map `C_e(0) → C̃(t)·C_e(0)`
//! with `C_g` constant; the two-qubit state follows from two identical,
//! independent copies of that map.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use thiserror::Error;

use crate::volterra::{AmplitudeTrajectory, TimeGrid};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Rates are undefined where `|C̃|` drops below this.
pub const RATE_MASK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("initial amplitudes are not normalized: |c_e|² + |c_g|² = {0}")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian (max |ρ − ρ†| = {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("amplitude magnitude {0} exceeds 1")]
    AmplitudeTooLarge(f64),
    #[error("time index {index} out of range (trajectory has {len} nodes)")]
    IndexOutOfRange { index: usize, len: usize },
}

fn check_density<const D: usize>(
    m: &nalgebra::SMatrix<Complex64, D, D>,
    min_eigenvalue: impl FnOnce() -> f64,
) -> Result<(), DynamicsError> {
    let asym = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > HERMITIAN_TOL {
        return Err(DynamicsError::NotHermitian(asym));
    }
    let trace = m.trace();
    if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
        return Err(DynamicsError::BadTrace(trace.re));
    }
    let min = min_eigenvalue();
    if min < EIGENVALUE_FLOOR {
        return Err(DynamicsError::NotPositive(min));
    }
    Ok(())
}

fn min_eigenvalue2(m: &Matrix2<Complex64>) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().min()
}

fn min_eigenvalue4(m: &Matrix4<Complex64>) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().min()
}

/// Single-qubit state in the basis `{|e⟩, |g⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2(Matrix2<Complex64>);

impl DensityMatrix2 {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self, DynamicsError> {
        check_density(&m, || min_eigenvalue2(&m))?;
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn excited_population(&self) -> f64 {
        self.0[(0, 0)].re
    }

    pub fn coherence(&self) -> Complex64 {
        self.0[(0, 1)]
    }
}

/// Two-qubit state in the basis
/// `{|e_A e_B⟩, |e_A g_B⟩, |g_A e_B⟩, |g_A g_B⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4(Matrix4<Complex64>);

impl DensityMatrix4 {
    pub fn new(m: Matrix4<Complex64>) -> Result<Self, DynamicsError> {
        check_density(&m, || min_eigenvalue4(&m))?;
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: Matrix4<Complex64>) -> Self {
        Self(m)
    }

    /// `ρ_A ⊗ ρ_B`.
    pub fn tensor(a: &DensityMatrix2, b: &DensityMatrix2) -> Self {
        Self(a.0.kronecker(&b.0))
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    /// Element `ρ_ij` with the 1-based indices used for the product basis.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i - 1, j - 1)]
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let hermitian = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let ev = hermitian.symmetric_eigenvalues();
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// Reduced excited-state population of qubit A, `ρ11 + ρ22`.
    pub fn excited_population_a(&self) -> f64 {
        self.0[(0, 0)].re + self.0[(1, 1)].re
    }

    /// True when every entry off the diagonal and anti-diagonal is below
    /// `tol` in magnitude.
    pub fn is_x_state(&self, tol: f64) -> bool {
        (0..4).all(|i| (0..4).all(|j| i == j || i + j == 3 || self.0[(i, j)].norm() <= tol))
    }
}

/// Single-qubit state at node `t_index` for initial amplitudes
/// `(c_e0, c_g0)`. Coherences are in the rotating frame.
pub fn single_qubit_state(
    traj: &AmplitudeTrajectory,
    c_e0: Complex64,
    c_g0: Complex64,
    t_index: usize,
) -> Result<DensityMatrix2, DynamicsError> {
    let amplitude = *traj
        .amplitude
        .get(t_index)
        .ok_or(DynamicsError::IndexOutOfRange {
            index: t_index,
            len: traj.amplitude.len(),
        })?;
    single_qubit_from_amplitude(c_e0, c_g0, amplitude)
}

/// Single-qubit state for a propagated amplitude `C̃(t)` (with `C̃(0) = 1`).
pub fn single_qubit_from_amplitude(
    c_e0: Complex64,
    c_g0: Complex64,
    amplitude: Complex64,
) -> Result<DensityMatrix2, DynamicsError> {
    let norm = c_e0.norm_sqr() + c_g0.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(DynamicsError::NotNormalized(norm));
    }
    let c_e = c_e0 * amplitude;
    let pop = c_e.norm_sqr();
    let coherence = c_g0.conj() * c_e;
    Ok(DensityMatrix2(Matrix2::new(
        Complex64::new(pop, 0.0),
        coherence,
        coherence.conj(),
        Complex64::new(1.0 - pop, 0.0),
    )))
}

/// `Γ(t)/γ` and rotating-frame `Ω̃(t)/γ`; `None` where `|C̃| < 1e−8`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub grid: TimeGrid,
    pub gamma_t: Vec<Option<f64>>,
    pub omega_t: Vec<Option<f64>>,
}

impl RateSeries {
    pub fn is_masked(&self, k: usize) -> bool {
        self.gamma_t[k].is_none()
    }

    /// Number of sign changes of `Γ` across consecutive valid nodes.
    pub fn gamma_sign_changes(&self) -> usize {
        let signs: Vec<f64> = self
            .gamma_t
            .iter()
            .flatten()
            .copied()
            .filter(|g| *g != 0.0)
            .map(f64::signum)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// `Γ = −2·Re[C̃′/C̃]`, `Ω̃ = −2·Im[C̃′/C̃]` from the stored right-hand side.
pub fn rate_series(traj: &AmplitudeTrajectory) -> RateSeries {
    let (gamma_t, omega_t) = traj
        .amplitude
        .iter()
        .zip(&traj.derivative)
        .map(|(c, dc)| {
            if c.norm() < RATE_MASK_THRESHOLD {
                (None, None)
            } else {
                let ratio = dc / c;
                (Some(-2.0 * ratio.re), Some(-2.0 * ratio.im))
            }
        })
        .unzip();
    RateSeries {
        grid: traj.grid,
        gamma_t,
        omega_t,
    }
}

/// Two-qubit state after both qubits decay into identical independent
/// reservoirs, given the propagated amplitude `c` (`C(0) = 1`).
pub fn assemble_two_qubit(
    rho0: &DensityMatrix4,
    c: Complex64,
) -> Result<DensityMatrix4, DynamicsError> {
    check_density(&rho0.0, || min_eigenvalue4(&rho0.0))?;
    let p = c.norm_sqr();
    if p > 1.0 + 1e-9 {
        return Err(DynamicsError::AmplitudeTooLarge(c.norm()));
    }
    Ok(assemble_unchecked(rho0, c))
}

pub(crate) fn assemble_unchecked(rho0: &DensityMatrix4, c: Complex64) -> DensityMatrix4 {
    let r = |i: usize, j: usize| rho0.0[(i - 1, j - 1)];
    let p = c.norm_sqr();
    let q = 1.0 - p;
    let real = |x: f64| Complex64::new(x, 0.0);

    let rho11 = r(1, 1).re * p * p;
    let rho22 = r(2, 2).re * p + r(1, 1).re * p * q;
    let rho33 = r(3, 3).re * p + r(1, 1).re * p * q;
    let rho44 = 1.0 - rho11 - rho22 - rho33;
    let rho12 = r(1, 2) * p * c;
    let rho13 = r(1, 3) * p * c;
    let rho14 = r(1, 4) * c * c;
    let rho23 = r(2, 3) * p;
    let rho24 = r(2, 4) * c + r(1, 3) * c * q;
    let rho34 = r(3, 4) * c + r(1, 2) * c * q;

    let m = Matrix4::new(
        real(rho11),
        rho12,
        rho13,
        rho14,
        rho12.conj(),
        real(rho22),
        rho23,
        rho24,
        rho13.conj(),
        rho23.conj(),
        real(rho33),
        rho34,
        rho14.conj(),
        rho24.conj(),
        rho34.conj(),
        real(rho44),
    );
    DensityMatrix4(m)
}
