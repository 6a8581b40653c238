//! Entanglement dynamics of two qubits moving through independent leaky
//! cavities.
//!
//! The pipeline is: [`model`] parameters → [`kernel`] memory kernel →
//! [`volterra`] amplitude trajectory → [`dynamics`] density matrices →
//! [`entanglement`] concurrence, orchestrated by [`harness`].

pub mod dynamics;
pub mod entanglement;
pub mod harness;
pub mod kernel;
pub mod model;
pub mod volterra;

pub use dynamics::{
    assemble_two_qubit, rate_series, single_qubit_state, DensityMatrix2, DensityMatrix4,
    DynamicsError, RateSeries,
};
pub use entanglement::{
    bell_psi, concurrence_general, concurrence_x, ConcurrenceTerms, ConcurrenceValue,
    EntanglementError,
};
pub use kernel::{
    quadrature_kernel, residue_kernel, ExponentialKernel, KernelBackend, KernelError,
    MemoryKernel, QuadratureConfig, QuadratureKernel,
};
pub use model::{
    check_feasibility, map_velocity, validate_params, CavityGeometry, CouplingRegime,
    FeasibilityReport, ModelError, SystemParams,
};
pub use volterra::{
    solve_aux, solve_history, stationary_analytic, AmplitudeTrajectory, SolverError, SolverKind,
    TimeGrid,
};
pub use harness::{
    figure_preset, run_scenario, sweep_velocity, HarnessError, InitialState, Observable, Scenario,
    ScenarioResult, SweepResult,
};
