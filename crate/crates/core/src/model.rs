//! Physical parameters, validation, and the desk-scale cavity geometry.
//!
//! Every quantity is expressed in units of the Markovian decay rate `γ`
//! (`γ = 1` internally). Conversions to SI units happen only in
//! [`map_velocity`] and [`check_feasibility`].

use std::f64::consts::PI;

use thiserror::Error;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Meters per second corresponding to `βω₀ = 1γ` for the ⁸⁵Rb circular
/// Rydberg transition (`ω₀ = 51.1 GHz`, `γ = 33.3 Hz`).
pub const VELOCITY_PER_BETA_OMEGA0: f64 = 0.2;

/// Prefactor of the de Broglie estimate `λ_B/λ₀ ≈ 1e−19 / β`.
pub const DE_BROGLIE_PREFACTOR: f64 = 1e-19;

/// Testable rendering of "λ_B/λ₀ ≪ 1".
pub const CLASSICAL_MARGIN: f64 = 1e-3;

/// Atomic recoil is negligible only above this velocity (m/s).
pub const RECOIL_MIN_VELOCITY: f64 = 1e-7;

/// Default carrier ratio `ω₀/γ`, far below the physical ~1.5e9 so that the
/// quadrature kernel stays tractable.
pub const DEFAULT_OMEGA0: f64 = 1e4;

pub const DEFAULT_T_MAX: f64 = 100.0;
pub const DEFAULT_DT: f64 = 1e-3;

/// Step used once the kernel oscillates quickly (`βω₀ ≥ 10γ`).
pub const FAST_MOTION_DT: f64 = 2e-4;

const GEOMETRY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("lambda must be positive (lambda = {0})")]
    NonPositiveLambda(f64),
    #[error("omega0 must be positive (omega0 = {0})")]
    NonPositiveOmega0(f64),
    #[error("dt must be positive (dt = {0})")]
    NonPositiveDt(f64),
    #[error("t_max must be at least dt (t_max = {t_max}, dt = {dt})")]
    HorizonShorterThanStep { t_max: f64, dt: f64 },
    #[error("beta_omega0 must be non-negative (beta_omega0 = {0})")]
    NegativeVelocity(f64),
    #[error("beta ≥ 1: beta_omega0 / omega0 = {0} is not sub-luminal")]
    SuperLuminal(f64),
    #[error("|delta| must be smaller than omega0 (delta = {delta}, omega0 = {omega0})")]
    DetuningTooLarge { delta: f64, omega0: f64 },
    #[error("parameter {name} is not finite ({value})")]
    NotFinite { name: &'static str, value: f64 },
}

/// Physical parameters in units of `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Cavity spectral width `λ/γ`.
    pub lambda_over_gamma: f64,
    /// Detuning `Δ = ω₀ − ω_n` in units of `γ`.
    pub delta_over_gamma: f64,
    /// Velocity parameter `βω₀/γ`.
    pub beta_omega0_over_gamma: f64,
    /// Desk-scale carrier frequency `ω₀/γ`.
    pub omega0_over_gamma: f64,
    /// Simulation horizon in `γt`.
    pub t_max_gamma: f64,
    /// Solver step in `γt`.
    pub dt_gamma: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            lambda_over_gamma: 0.01,
            delta_over_gamma: 0.0,
            beta_omega0_over_gamma: 0.0,
            omega0_over_gamma: DEFAULT_OMEGA0,
            t_max_gamma: DEFAULT_T_MAX,
            dt_gamma: DEFAULT_DT,
        }
    }
}

impl SystemParams {
    pub fn new(lambda: f64, delta: f64, beta_omega0: f64) -> Self {
        Self {
            lambda_over_gamma: lambda,
            delta_over_gamma: delta,
            beta_omega0_over_gamma: beta_omega0,
            ..Self::default()
        }
    }

    pub fn with_horizon(mut self, t_max: f64, dt: f64) -> Self {
        self.t_max_gamma = t_max;
        self.dt_gamma = dt;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0_over_gamma = omega0;
        self
    }

    /// `β = v/c`.
    pub fn beta(&self) -> f64 {
        self.beta_omega0_over_gamma / self.omega0_over_gamma
    }

    /// Lorentzian center `ω₁ = ω₀ − Δ`, which is also the quasi-mode
    /// frequency `ω_n`.
    pub fn omega1(&self) -> f64 {
        self.omega0_over_gamma - self.delta_over_gamma
    }

    pub fn validate(self) -> Result<Self, ModelError> {
        validate_params(self)
    }
}

/// Returns `raw` unchanged if every invariant holds, otherwise the first
/// violation.
pub fn validate_params(raw: SystemParams) -> Result<SystemParams, ModelError> {
    let fields = [
        ("lambda", raw.lambda_over_gamma),
        ("delta", raw.delta_over_gamma),
        ("beta_omega0", raw.beta_omega0_over_gamma),
        ("omega0", raw.omega0_over_gamma),
        ("t_max", raw.t_max_gamma),
        ("dt", raw.dt_gamma),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(ModelError::NotFinite { name, value });
        }
    }
    if raw.lambda_over_gamma <= 0.0 {
        return Err(ModelError::NonPositiveLambda(raw.lambda_over_gamma));
    }
    if raw.omega0_over_gamma <= 0.0 {
        return Err(ModelError::NonPositiveOmega0(raw.omega0_over_gamma));
    }
    if raw.dt_gamma <= 0.0 {
        return Err(ModelError::NonPositiveDt(raw.dt_gamma));
    }
    if raw.t_max_gamma < raw.dt_gamma {
        return Err(ModelError::HorizonShorterThanStep {
            t_max: raw.t_max_gamma,
            dt: raw.dt_gamma,
        });
    }
    if raw.beta_omega0_over_gamma < 0.0 {
        return Err(ModelError::NegativeVelocity(raw.beta_omega0_over_gamma));
    }
    if raw.beta() >= 1.0 {
        return Err(ModelError::SuperLuminal(raw.beta()));
    }
    if raw.delta_over_gamma.abs() >= raw.omega0_over_gamma {
        return Err(ModelError::DetuningTooLarge {
            delta: raw.delta_over_gamma,
            omega0: raw.omega0_over_gamma,
        });
    }
    Ok(raw)
}

/// Step size the solvers use unless overridden.
pub fn default_dt(beta_omega0_over_gamma: f64) -> f64 {
    if beta_omega0_over_gamma >= 10.0 {
        FAST_MOTION_DT
    } else {
        DEFAULT_DT
    }
}

/// Physical velocity in m/s for the ⁸⁵Rb parameter set.
pub fn map_velocity(beta_omega0_over_gamma: f64) -> Result<f64, ModelError> {
    if beta_omega0_over_gamma < 0.0 || beta_omega0_over_gamma.is_nan() {
        return Err(ModelError::NegativeVelocity(beta_omega0_over_gamma));
    }
    Ok(VELOCITY_PER_BETA_OMEGA0 * beta_omega0_over_gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    /// `λ_B/λ₀` estimate; 0 for a stationary qubit.
    pub de_broglie_ratio: f64,
    pub recoil_ok: bool,
    pub classical_ok: bool,
    pub velocity_mps: f64,
}

/// Classical-motion and recoil checks for a given `βω₀/γ`.
///
/// A stationary qubit is reported as classical (infinitely heavy atom)
/// but fails the recoil bound; simulation is still allowed.
pub fn check_feasibility(beta_omega0_over_gamma: f64) -> Result<FeasibilityReport, ModelError> {
    let velocity_mps = map_velocity(beta_omega0_over_gamma)?;
    let de_broglie_ratio = if velocity_mps == 0.0 {
        0.0
    } else {
        DE_BROGLIE_PREFACTOR / (velocity_mps / SPEED_OF_LIGHT)
    };
    Ok(FeasibilityReport {
        de_broglie_ratio,
        recoil_ok: velocity_mps > RECOIL_MIN_VELOCITY,
        classical_ok: de_broglie_ratio < CLASSICAL_MARGIN,
        velocity_mps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingRegime {
    Weak,
    Strong,
    Critical,
}

/// Strong coupling (non-Markovian) when `γ > λ/2`.
pub fn coupling_regime(lambda_over_gamma: f64) -> Result<CouplingRegime, ModelError> {
    if lambda_over_gamma <= 0.0 || lambda_over_gamma.is_nan() {
        return Err(ModelError::NonPositiveLambda(lambda_over_gamma));
    }
    Ok(if lambda_over_gamma < 2.0 {
        CouplingRegime::Strong
    } else if lambda_over_gamma > 2.0 {
        CouplingRegime::Weak
    } else {
        CouplingRegime::Critical
    })
}

/// Cavity `(0, l)` expressed through the transit time `τ = l/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    pub n_mode: u64,
    pub tau_gamma: f64,
}

impl CavityGeometry {
    /// Geometry for an explicit mode index, `τ = nπ/ω_n`.
    pub fn from_mode(params: &SystemParams, n_mode: u64) -> Self {
        Self {
            n_mode,
            tau_gamma: n_mode as f64 * PI / params.omega1(),
        }
    }

    /// Checks the quantization and in-cavity constraints.
    pub fn is_consistent(&self, params: &SystemParams) -> bool {
        let target = self.n_mode as f64 * PI;
        let actual = params.omega1() * self.tau_gamma;
        self.n_mode >= 1
            && ((actual - target) / target).abs() <= GEOMETRY_REL_TOL
            && self.tau_gamma >= params.beta() * params.t_max_gamma
    }

    /// Time at which the qubit reaches the far mirror, `τ/β`.
    pub fn exit_time(&self, params: &SystemParams) -> f64 {
        let beta = params.beta();
        if beta == 0.0 {
            f64::INFINITY
        } else {
            self.tau_gamma / beta
        }
    }
}

/// Shortest cavity (smallest `n`) that keeps the qubit inside for the whole
/// horizon.
pub fn desk_scale_geometry(params: &SystemParams) -> CavityGeometry {
    let omega_n = params.omega1();
    let travel = params.beta() * params.t_max_gamma;
    let mut n = ((travel * omega_n / PI).ceil() as u64).max(1);
    // ceil() can land one below the bound after rounding.
    while (n as f64) * PI / omega_n < travel {
        n += 1;
    }
    CavityGeometry::from_mode(params, n)
}
