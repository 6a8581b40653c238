//! Scenarios, figure presets, sweeps and file output.

mod compare;
mod config;
mod output;
mod presets;
pub mod selfcheck;
mod sweep;

use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::{
    self, rate_series, single_qubit_from_amplitude, DensityMatrix4, DynamicsError, RateSeries,
};
use crate::entanglement::{self, EntanglementError, X_STRUCTURE_TOL};
use crate::kernel::{residue_kernel, KernelBackend, KernelError, QuadratureConfig, QuadratureKernel};
use crate::model::{self, desk_scale_geometry, ModelError, SystemParams};
use crate::volterra::{solve_aux, solve_history, AmplitudeTrajectory, SolverError, SolverKind, TimeGrid};

pub use compare::{compare_kernels, compare_solvers, KernelComparison, SolverComparison};
pub use config::{parse_config, RunConfig};
pub use output::{
    format_csv, manifest_text, plot_script, write_figure, write_outputs, write_sweep, CSV_HEADER,
};
pub use presets::{figure_layout, figure_preset, FigureLayout, FigureName, Panel, PlotQuantity};
pub use sweep::{sweep, sweep_scenario, sweep_velocity, SweepAxis, SweepPoint, SweepResult, SweepRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error("the quadrature kernel backend requires the history solver")]
    QuadratureNeedsHistory,
    #[error("unknown figure preset {0:?} (expected fig2..fig7)")]
    UnknownPreset(String),
    #[error("unknown initial state {0:?} (expected bell-psi)")]
    UnknownInitialState(String),
    #[error("scenario {label}: {source}")]
    Scenario {
        label: String,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("sweep axis must be strictly increasing ({0} follows {1})")]
    AxisNotIncreasing(f64, f64),
    #[error("worker pool: {0}")]
    WorkerPool(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Two-qubit state at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    BellPsi,
    /// Independent qubits, each given by `(c_e, c_g)`.
    Product {
        a: (Complex64, Complex64),
        b: (Complex64, Complex64),
    },
    Density(DensityMatrix4),
}

impl InitialState {
    pub fn density(&self) -> Result<DensityMatrix4, HarnessError> {
        let one = Complex64::new(1.0, 0.0);
        match self {
            InitialState::BellPsi => Ok(entanglement::bell_psi()),
            InitialState::Product { a, b } => Ok(DensityMatrix4::tensor(
                &single_qubit_from_amplitude(a.0, a.1, one)?,
                &single_qubit_from_amplitude(b.0, b.1, one)?,
            )),
            InitialState::Density(rho) => Ok(DensityMatrix4::new(*rho.matrix())?),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialState::BellPsi => "bell-psi",
            InitialState::Product { .. } => "product",
            InitialState::Density(_) => "density",
        }
    }
}

impl std::str::FromStr for InitialState {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bell-psi" => Ok(InitialState::BellPsi),
            other => Err(HarnessError::UnknownInitialState(other.to_string())),
        }
    }
}

/// How the solver step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Velocity-dependent default.
    Auto,
    /// Use `params.dt_gamma` as given.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub params: SystemParams,
    pub kernel_backend: KernelBackend,
    pub solver: SolverKind,
    pub initial_state: InitialState,
    pub step_rule: StepRule,
    /// Only used by the quadrature backend. The boundary branches make the
    /// kernel two-time, so the default leaves them out.
    pub quadrature: QuadratureConfig,
}

impl Scenario {
    /// Residue kernel, auxiliary solver, Bell initial state, automatic step.
    pub fn new(label: impl Into<String>, params: SystemParams) -> Self {
        Self {
            label: label.into(),
            params,
            kernel_backend: KernelBackend::Residue,
            solver: SolverKind::Aux,
            initial_state: InitialState::BellPsi,
            step_rule: StepRule::Auto,
            quadrature: QuadratureConfig::default().without_boundary_term(),
        }
    }

    pub fn with_backend(mut self, backend: KernelBackend, solver: SolverKind) -> Self {
        self.kernel_backend = backend;
        self.solver = solver;
        self
    }

    pub fn with_step(mut self, dt_gamma: f64) -> Self {
        self.params.dt_gamma = dt_gamma;
        self.step_rule = StepRule::Fixed;
        self
    }

    /// Parameters with the step rule applied.
    pub fn effective_params(&self) -> SystemParams {
        let mut p = self.params;
        if self.step_rule == StepRule::Auto {
            p.dt_gamma = model::default_dt(p.beta_omega0_over_gamma);
        }
        p
    }

    pub fn validate(&self) -> Result<SystemParams, HarnessError> {
        if self.kernel_backend == KernelBackend::Quadrature && self.solver != SolverKind::History {
            return Err(HarnessError::QuadratureNeedsHistory);
        }
        Ok(self.effective_params().validate()?)
    }
}

/// One output row; rates are `None` where the amplitude vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioRow {
    pub gamma_t: f64,
    pub amplitude: Complex64,
    pub pop_e: f64,
    pub concurrence: f64,
    pub gamma_rate: Option<f64>,
    pub lamb_shift: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub params: SystemParams,
    pub trajectory: AmplitudeTrajectory,
    pub rates: RateSeries,
    pub rows: Vec<ScenarioRow>,
}

/// Scalar reduction of a concurrence time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    /// Value at the grid node nearest to `γt`.
    AtTime(f64),
    /// Trapezoidal mean over `[from, to]`.
    TimeAverage { from: f64, to: f64 },
}

impl Observable {
    pub fn evaluate(&self, result: &ScenarioResult) -> f64 {
        match *self {
            Observable::AtTime(t) => result.concurrence_at(t),
            Observable::TimeAverage { from, to } => result.mean_concurrence(from, to),
        }
    }
}

impl ScenarioResult {
    pub fn concurrence(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.concurrence)
    }

    pub fn concurrence_at(&self, t_gamma: f64) -> f64 {
        self.rows[self.trajectory.grid.index_of(t_gamma)].concurrence
    }

    pub fn mean_concurrence(&self, from: f64, to: f64) -> f64 {
        let grid = &self.trajectory.grid;
        let lo = grid.index_of(from);
        let hi = grid.index_of(to);
        if hi <= lo {
            return self.rows[lo].concurrence;
        }
        let h = grid.dt_gamma;
        let inner: f64 = self.rows[lo + 1..hi].iter().map(|r| r.concurrence).sum();
        let ends = 0.5 * (self.rows[lo].concurrence + self.rows[hi].concurrence);
        (inner + ends) * h / (grid.time(hi) - grid.time(lo))
    }

    /// Grid times of local concurrence minima below `threshold`.
    pub fn concurrence_dips(&self, threshold: f64) -> Vec<f64> {
        self.rows
            .windows(3)
            .filter(|w| {
                w[1].concurrence < threshold
                    && w[1].concurrence <= w[0].concurrence
                    && w[1].concurrence <= w[2].concurrence
            })
            .map(|w| w[1].gamma_t)
            .collect()
    }

    /// First time `Re C̃` changes sign, linearly interpolated.
    pub fn first_amplitude_zero(&self) -> Option<f64> {
        self.rows.windows(2).find_map(|w| {
            let (a, b) = (w[0].amplitude.re, w[1].amplitude.re);
            (a > 0.0 && b <= 0.0).then(|| w[0].gamma_t + (w[1].gamma_t - w[0].gamma_t) * a / (a - b))
        })
    }
}

fn solve(scenario: &Scenario, params: &SystemParams) -> Result<AmplitudeTrajectory, HarnessError> {
    let grid = TimeGrid::covering(params.t_max_gamma, params.dt_gamma)?;
    let traj = match scenario.kernel_backend {
        KernelBackend::Residue => {
            let kernel = residue_kernel(params);
            match scenario.solver {
                SolverKind::Aux => solve_aux(&kernel, grid)?,
                SolverKind::History => solve_history(&kernel, grid)?,
            }
        }
        KernelBackend::Quadrature => {
            let kernel =
                QuadratureKernel::new(*params, desk_scale_geometry(params), scenario.quadrature)?;
            solve_history(&kernel, grid)?
        }
    };
    Ok(traj)
}

fn run_inner(scenario: &Scenario) -> Result<ScenarioResult, HarnessError> {
    let params = scenario.validate()?;
    let rho0 = scenario.initial_state.density()?;
    let trajectory = solve(scenario, &params)?;
    let rates = rate_series(&trajectory);
    let mut rows = Vec::with_capacity(trajectory.amplitude.len());
    for (k, &c) in trajectory.amplitude.iter().enumerate() {
        let rho = dynamics::assemble_two_qubit(&rho0, c)?;
        let concurrence = if rho.is_x_state(X_STRUCTURE_TOL) {
            entanglement::concurrence_x(&rho)?
        } else {
            entanglement::concurrence_general(&rho)?
        };
        rows.push(ScenarioRow {
            gamma_t: trajectory.grid.time(k),
            amplitude: c,
            pop_e: rho.excited_population_a(),
            concurrence: concurrence.value,
            gamma_rate: rates.gamma_t[k],
            lamb_shift: rates.omega_t[k],
        });
    }
    Ok(ScenarioResult {
        scenario: scenario.clone(),
        params,
        trajectory,
        rates,
        rows,
    })
}

/// Solve one scenario and derive every tabulated observable.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioResult, HarnessError> {
    run_inner(scenario).map_err(|e| HarnessError::Scenario {
        label: scenario.label.clone(),
        source: Box::new(e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2(bw: f64) -> Scenario {
        Scenario::new(format!("bw{bw}"), SystemParams::new(0.01, 0.0, bw))
    }

    #[test]
    fn initial_row() {
        for s in [fig2(0.0), fig2(1.0), fig2(20.0)] {
            let r = run_scenario(&s).unwrap();
            assert_eq!(r.rows[0].concurrence, 1.0);
            assert_eq!(r.rows[0].pop_e, 0.5);
            assert_eq!(r.rows[0].gamma_t, 0.0);
        }
    }

    #[test]
    fn stationary_row_matches_oracle() {
        let r = run_scenario(&fig2(0.0)).unwrap();
        assert!((r.concurrence_at(10.0) - 0.6039218047989944).abs() < 1e-8);
        assert_eq!(r.trajectory.grid.dt_gamma, 1e-3);
        assert_eq!(r.rows.len(), 100_001);
    }

    #[test]
    fn step_rule() {
        assert_eq!(fig2(10.0).effective_params().dt_gamma, 2e-4);
        assert_eq!(fig2(1.0).effective_params().dt_gamma, 1e-3);
        assert_eq!(fig2(10.0).with_step(0.01).effective_params().dt_gamma, 0.01);
    }

    #[test]
    fn moving_qubit_keeps_entanglement() {
        let r = run_scenario(&fig2(1.0)).unwrap();
        assert!(r.concurrence_at(100.0) >= 0.9);
    }

    #[test]
    fn quadrature_requires_history() {
        let s = fig2(0.0).with_backend(KernelBackend::Quadrature, SolverKind::Aux);
        let err = run_scenario(&s).unwrap_err();
        assert!(matches!(
            err,
            HarnessError::Scenario { ref source, .. } if matches!(**source, HarnessError::QuadratureNeedsHistory)
        ));
        assert!(err.to_string().starts_with("scenario bw0:"));
    }

    #[test]
    fn product_state_stays_separable() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut sc = fig2(0.0).with_step(0.01);
        sc.params.t_max_gamma = 40.0;
        sc.initial_state = InitialState::Product {
            a: (Complex64::new(s, 0.0), Complex64::new(0.0, s)),
            b: (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        };
        let r = run_scenario(&sc).unwrap();
        assert!(r.concurrence().all(|c| c < 1e-7));
        assert!((r.rows[0].pop_e - 0.5).abs() < 1e-15);
    }

    #[test]
    fn observables() {
        let mut sc = fig2(0.0).with_step(0.01);
        sc.params.t_max_gamma = 50.0;
        let r = run_scenario(&sc).unwrap();
        assert_eq!(Observable::AtTime(10.0).evaluate(&r), r.rows[1000].concurrence);
        let mean = Observable::TimeAverage { from: 0.0, to: 50.0 }.evaluate(&r);
        let max = r.concurrence().fold(0.0, f64::max);
        let min = r.concurrence().fold(1.0, f64::min);
        assert!(mean > min && mean < max);
        let zero = r.first_amplitude_zero().unwrap();
        assert!((zero - 33.58763509247003).abs() < 1e-3, "{zero}");
        assert!(r.concurrence_dips(1e-6).iter().any(|t| (t - zero).abs() < 0.02));
    }
}
