//! Memory kernel `F(t,t′)` of the moving-qubit amplitude equation.
//!
//! Two backends are provided:
//!
//! * [`residue_kernel`]: closed form obtained by contour integration of the
//!   Lorentzian, after dropping the boundary branch of the sine product and
//!   extending the frequency integral to `−∞`. The result is a sum of two
//!   complex exponentials in the lag `t − t′`.
//! * [`quadrature_kernel`]: direct adaptive Gauss–Kronrod integration of
//!   the frequency integral, optionally keeping the boundary branch and the
//!   `ω ≥ 0` cut-off. Used as an independent oracle at desk-scale `ω₀/γ`.

mod expint;
mod quadrature;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{CavityGeometry, SystemParams};

pub use expint::{exp1, scaled_exp1};
pub use quadrature::{
    lorentzian_fourier_tail, quadrature_kernel, GaussKronrod21, QuadratureConfig, QuadratureKernel,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("negative lag {0} (kernel is defined for t ≥ t′)")]
    NegativeLag(f64),
    #[error("time {t} lies outside the cavity (β·t = {travel} > τ = {tau})")]
    OutsideCavity { t: f64, travel: f64, tau: f64 },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("branch rate {0} has non-positive real part")]
    NonDecayingBranch(Complex64),
    #[error("quadrature did not converge within {budget} panels (error estimate {error:e})")]
    NonConvergence { budget: usize, error: f64 },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown kernel backend '{0}' (expected residue or quadrature)")]
    UnknownBackend(String),
}

/// Lorentzian spectral density `J(ω) = (1/2π)·γλ² / [(ω₀ − ω − Δ)² + λ²]`.
pub fn spectral_density(omega_over_gamma: f64, params: &SystemParams) -> f64 {
    let lambda = params.lambda_over_gamma;
    let offset = params.omega1() - omega_over_gamma;
    lambda * lambda / (2.0 * PI * (offset * offset + lambda * lambda))
}

/// Coupling profile `sin[ω(βt − τ)]` of a qubit at `z = vt`.
pub fn shape_function(
    t_gamma: f64,
    omega_over_gamma: f64,
    params: &SystemParams,
    geom: &CavityGeometry,
) -> Result<f64, KernelError> {
    let travel = check_inside(t_gamma, params, geom)?;
    Ok((omega_over_gamma * (travel - geom.tau_gamma)).sin())
}

/// Returns `β·t` if the qubit is still in the cavity at `t`.
pub(crate) fn check_inside(
    t_gamma: f64,
    params: &SystemParams,
    geom: &CavityGeometry,
) -> Result<f64, KernelError> {
    if t_gamma < 0.0 {
        return Err(KernelError::NegativeTime(t_gamma));
    }
    let travel = params.beta() * t_gamma;
    if travel > geom.tau_gamma * (1.0 + 1e-12) {
        return Err(KernelError::OutsideCavity {
            t: t_gamma,
            travel,
            tau: geom.tau_gamma,
        });
    }
    Ok(travel)
}

/// One term `w·e^{−μ·(t−t′)}` of an exponential-sum kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub weight: Complex64,
    pub rate: Complex64,
}

/// `F(t,t′) = Σ_j w_j·e^{−μ_j (t−t′)}` for `t ≥ t′`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialKernel {
    branches: Vec<Branch>,
}

impl ExponentialKernel {
    pub fn new(branches: Vec<Branch>) -> Result<Self, KernelError> {
        if let Some(b) = branches.iter().find(|b| !(b.rate.re > 0.0)) {
            return Err(KernelError::NonDecayingBranch(b.rate));
        }
        Ok(Self { branches })
    }

    /// `W·e^{−Λ(t−t′)}`.
    pub fn single(weight: Complex64, rate: Complex64) -> Result<Self, KernelError> {
        Self::new(vec![Branch { weight, rate }])
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn total_weight(&self) -> Complex64 {
        self.branches.iter().map(|b| b.weight).sum()
    }

    /// Slowest decay rate, `min_j Re μ_j`.
    pub fn envelope_rate(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| b.rate.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, lag: f64) -> Result<Complex64, KernelError> {
        eval_exponential_kernel(self, lag)
    }

    pub(crate) fn eval_unchecked(&self, lag: f64) -> Complex64 {
        self.branches
            .iter()
            .map(|b| b.weight * (-b.rate * lag).exp())
            .sum()
    }
}

/// `Σ_j w_j e^{−μ_j·lag}`; negative lags are rejected.
pub fn eval_exponential_kernel(
    kernel: &ExponentialKernel,
    lag: f64,
) -> Result<Complex64, KernelError> {
    if !(lag >= 0.0) {
        return Err(KernelError::NegativeLag(lag));
    }
    Ok(kernel.eval_unchecked(lag))
}

/// Closed-form two-branch kernel
/// `F = (γλ/8)·[e^{−μ₁(t−t′)} + e^{−μ₂(t−t′)}]` with
/// `μ₁ = λ(1−β) − i(Δ + βω₁)` and `μ₂ = λ(1+β) − i(Δ − βω₁)`.
///
/// At `β = 0` the branches coincide and are merged into a single term
/// `(γλ/4)·e^{(iΔ−λ)(t−t′)}`.
pub fn residue_kernel(params: &SystemParams) -> ExponentialKernel {
    let lambda = params.lambda_over_gamma;
    let delta = params.delta_over_gamma;
    let beta = params.beta();
    if beta == 0.0 {
        return ExponentialKernel {
            branches: vec![Branch {
                weight: Complex64::new(lambda / 4.0, 0.0),
                rate: Complex64::new(lambda, -delta),
            }],
        };
    }
    let doppler = beta * params.omega1();
    let weight = Complex64::new(lambda / 8.0, 0.0);
    ExponentialKernel {
        branches: vec![
            Branch {
                weight,
                rate: Complex64::new(lambda * (1.0 - beta), -(delta + doppler)),
            },
            Branch {
                weight,
                rate: Complex64::new(lambda * (1.0 + beta), -(delta - doppler)),
            },
        ],
    }
}

/// Anything the history solver can integrate against.
pub trait MemoryKernel: Sync {
    fn eval(&self, t: f64, t_prime: f64) -> Result<Complex64, KernelError>;

    /// True when `eval(t, t′)` depends on `t − t′` only, which lets solvers
    /// tabulate the kernel on a lag grid.
    fn is_lag_only(&self) -> bool {
        false
    }
}

impl MemoryKernel for ExponentialKernel {
    fn eval(&self, t: f64, t_prime: f64) -> Result<Complex64, KernelError> {
        eval_exponential_kernel(self, t - t_prime)
    }

    fn is_lag_only(&self) -> bool {
        true
    }
}

/// Adapter for an arbitrary two-time closure.
pub struct TwoTimeFn<F>(pub F);

impl<F> MemoryKernel for TwoTimeFn<F>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    fn eval(&self, t: f64, t_prime: f64) -> Result<Complex64, KernelError> {
        Ok((self.0)(t, t_prime))
    }
}

/// Adapter for a closure of the lag `t − t′`.
pub struct LagFn<F>(pub F);

impl<F> MemoryKernel for LagFn<F>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    fn eval(&self, t: f64, t_prime: f64) -> Result<Complex64, KernelError> {
        Ok((self.0)(t - t_prime))
    }

    fn is_lag_only(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelBackend {
    #[default]
    Residue,
    Quadrature,
}

impl KernelBackend {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelBackend::Residue => "residue",
            KernelBackend::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for KernelBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelBackend {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "residue" => Ok(KernelBackend::Residue),
            "quadrature" => Ok(KernelBackend::Quadrature),
            other => Err(KernelError::UnknownBackend(other.to_string())),
        }
    }
}
