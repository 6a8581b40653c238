//! Two-qubit concurrence.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::DensityMatrix4;

/// Entries off the diagonal and anti-diagonal above this disqualify the
/// X-state formula.
pub const X_STRUCTURE_TOL: f64 = 1e-12;
/// Eigenvalues of ρ below this are reported as corruption rather than
/// clamped.
pub const CORRUPTION_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntanglementError {
    #[error("matrix is not X-shaped (entry ({row},{col}) has magnitude {magnitude:e})")]
    NotXState {
        row: usize,
        col: usize,
        magnitude: f64,
    },
    #[error("density matrix has eigenvalue {0:e}; upstream state is corrupted")]
    NegativeEigenvalue(f64),
}

/// Quantities compared inside the clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConcurrenceTerms {
    /// Square roots of the spin-flip eigenvalues, descending.
    SpinFlip { sqrt_eigenvalues: [f64; 4] },
    /// `2|ρ14|` vs `2√(ρ22ρ33)` and `2|ρ23|` vs `2√(ρ11ρ44)`.
    XState {
        outer_coherence: f64,
        inner_populations: f64,
        inner_coherence: f64,
        outer_populations: f64,
    },
}

impl ConcurrenceTerms {
    /// The unclamped difference.
    pub fn raw(&self) -> f64 {
        match *self {
            Self::SpinFlip { sqrt_eigenvalues: s } => s[0] - s[1] - s[2] - s[3],
            Self::XState {
                outer_coherence,
                inner_populations,
                inner_coherence,
                outer_populations,
            } => (outer_coherence - inner_populations).max(inner_coherence - outer_populations),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceValue {
    pub value: f64,
    pub branch_terms: ConcurrenceTerms,
}

impl ConcurrenceValue {
    fn from_terms(branch_terms: ConcurrenceTerms) -> Self {
        Self {
            value: branch_terms.raw().clamp(0.0, 1.0),
            branch_terms,
        }
    }
}

fn spin_flip() -> Matrix4<Complex64> {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    Matrix4::new(z, z, z, -o, z, z, o, z, z, o, z, z, -o, z, z, z)
}

/// Concurrence of an arbitrary two-qubit state.
///
/// With `ρ = MM†`, `M = V·diag(√μ)`, the spin-flip eigenvalues `λ_i` of
/// `ρρ̃` are the squared singular values of the symmetric matrix
/// `Mᵀ(σ_y⊗σ_y)M`, so no square root of `ρ` is ever formed.
pub fn concurrence_general(rho: &DensityMatrix4) -> Result<ConcurrenceValue, EntanglementError> {
    let m = rho.matrix();
    let hermitian = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(hermitian);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < CORRUPTION_FLOOR {
        return Err(EntanglementError::NegativeEigenvalue(min));
    }
    let mut factor = eig.eigenvectors;
    for (j, mu) in eig.eigenvalues.iter().enumerate() {
        let s = Complex64::new(mu.max(0.0).sqrt(), 0.0);
        for i in 0..4 {
            factor[(i, j)] *= s;
        }
    }
    let tau = factor.transpose() * spin_flip() * factor;
    let sv = tau.svd(false, false).singular_values;
    let mut s = [sv[0], sv[1], sv[2], sv[3]];
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(ConcurrenceValue::from_terms(ConcurrenceTerms::SpinFlip {
        sqrt_eigenvalues: s,
    }))
}

/// Closed-form concurrence for X-shaped states.
pub fn concurrence_x(rho: &DensityMatrix4) -> Result<ConcurrenceValue, EntanglementError> {
    let m = rho.matrix();
    for i in 0..4 {
        for j in 0..4 {
            let magnitude = m[(i, j)].norm();
            if i != j && i + j != 3 && magnitude > X_STRUCTURE_TOL {
                return Err(EntanglementError::NotXState {
                    row: i + 1,
                    col: j + 1,
                    magnitude,
                });
            }
        }
    }
    let p = |k: usize| m[(k, k)].re.max(0.0);
    Ok(ConcurrenceValue::from_terms(ConcurrenceTerms::XState {
        outer_coherence: 2.0 * m[(0, 3)].norm(),
        inner_populations: 2.0 * (p(1) * p(2)).sqrt(),
        inner_coherence: 2.0 * m[(1, 2)].norm(),
        outer_populations: 2.0 * (p(0) * p(3)).sqrt(),
    }))
}

/// `(|e_A e_B⟩ + |g_A g_B⟩)/√2`.
pub fn bell_psi() -> DensityMatrix4 {
    let h = Complex64::new(0.5, 0.0);
    let z = Complex64::new(0.0, 0.0);
    DensityMatrix4::new_unchecked(Matrix4::new(h, z, z, h, z, z, z, z, z, z, z, z, h, z, z, h))
}
