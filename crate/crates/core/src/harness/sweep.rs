//! Parameter sweeps on a bounded worker pool.

use std::fmt;

use rayon::prelude::*;

use super::{run_scenario, HarnessError, Observable, Scenario};
use crate::kernel::KernelBackend;
use crate::volterra::SolverKind;

/// Upper bound on sweep worker threads.
pub const MAX_WORKERS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Velocity,
    Bandwidth,
    Detuning,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Velocity => "beta_omega0",
            SweepAxis::Bandwidth => "lambda",
            SweepAxis::Detuning => "delta",
        }
    }

    fn apply(&self, scenario: &mut Scenario, value: f64) {
        let p = &mut scenario.params;
        match self {
            SweepAxis::Velocity => p.beta_omega0_over_gamma = value,
            SweepAxis::Bandwidth => p.lambda_over_gamma = value,
            SweepAxis::Detuning => p.delta_over_gamma = value,
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "velocity" | "beta_omega0" => Ok(SweepAxis::Velocity),
            "bandwidth" | "lambda" => Ok(SweepAxis::Bandwidth),
            "detuning" | "delta" => Ok(SweepAxis::Detuning),
            other => Err(format!("unknown sweep axis {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// The requested observable.
    pub value: f64,
    pub final_concurrence: f64,
    pub mean_concurrence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub dt_gamma: f64,
    /// Failures are kept as text so the remaining points still report.
    pub outcome: Result<SweepPoint, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub observable: Observable,
    pub backend: KernelBackend,
    pub solver: SolverKind,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| r.outcome.as_ref().ok().map(|p| p.value))
            .collect()
    }
}

fn check_axis(grid: &[f64]) -> Result<(), HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(HarnessError::AxisNotIncreasing(w[1], w[0]));
    }
    Ok(())
}

/// Scenario for one sweep point; also what a standalone run would use.
pub fn sweep_scenario(base: &Scenario, axis: SweepAxis, value: f64) -> Scenario {
    let mut s = base.clone();
    axis.apply(&mut s, value);
    s.label = format!("{}_{}{}", base.label, axis.as_str(), value);
    s
}

/// Runs `base` once per grid value of `axis`. `workers` defaults to the
/// available parallelism, capped at [`MAX_WORKERS`].
pub fn sweep(
    base: &Scenario,
    axis: SweepAxis,
    grid: &[f64],
    observable: Observable,
    workers: Option<usize>,
) -> Result<SweepResult, HarnessError> {
    check_axis(grid)?;
    let threads = workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, MAX_WORKERS);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::WorkerPool(e.to_string()))?;
    let rows = pool.install(|| {
        grid.par_iter()
            .map(|&value| {
                let scenario = sweep_scenario(base, axis, value);
                let dt_gamma = scenario.effective_params().dt_gamma;
                let outcome = run_scenario(&scenario)
                    .map(|r| SweepPoint {
                        value: observable.evaluate(&r),
                        final_concurrence: r.rows.last().map_or(f64::NAN, |row| row.concurrence),
                        mean_concurrence: r.mean_concurrence(0.0, r.trajectory.grid.t_end()),
                    })
                    .map_err(|e| e.to_string());
                SweepRow {
                    axis_value: value,
                    dt_gamma,
                    outcome,
                }
            })
            .collect()
    });
    Ok(SweepResult {
        axis,
        observable,
        backend: base.kernel_backend,
        solver: base.solver,
        rows,
    })
}

pub fn sweep_velocity(
    base: &Scenario,
    grid: &[f64],
    observable: Observable,
) -> Result<SweepResult, HarnessError> {
    sweep(base, SweepAxis::Velocity, grid, observable, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;

    fn base() -> Scenario {
        let mut s = Scenario::new("s", SystemParams::new(0.01, 0.0, 0.0)).with_step(0.01);
        s.params.t_max_gamma = 30.0;
        s
    }

    #[test]
    fn rows_match_standalone_runs() {
        let grid = [0.0, 0.5, 3.0];
        let result = sweep(&base(), SweepAxis::Velocity, &grid, Observable::AtTime(30.0), Some(3)).unwrap();
        assert_eq!(result.rows.len(), 3);
        for (row, &bw) in result.rows.iter().zip(&grid) {
            assert_eq!(row.axis_value, bw);
            let alone = run_scenario(&sweep_scenario(&base(), SweepAxis::Velocity, bw)).unwrap();
            let point = row.outcome.as_ref().unwrap();
            assert_eq!(point.value.to_bits(), alone.concurrence_at(30.0).to_bits());
        }
    }

    #[test]
    fn single_stationary_point() {
        let r = sweep_velocity(&base(), &[0.0], Observable::AtTime(30.0)).unwrap();
        let alone = run_scenario(&base()).unwrap();
        assert_eq!(r.values(), [Some(alone.concurrence_at(30.0))]);
    }

    #[test]
    fn slow_velocities_protect_on_average() {
        let mut b = base();
        b.params.t_max_gamma = 100.0;
        let avg = Observable::TimeAverage { from: 0.0, to: 100.0 };
        let r = sweep_velocity(&b, &[0.01, 0.1, 1.0], avg).unwrap();
        let v: Vec<f64> = r.values().into_iter().map(Option::unwrap).collect();
        assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
    }

    #[test]
    fn failures_are_recorded_per_point() {
        let r = sweep(&base(), SweepAxis::Bandwidth, &[-1.0, 0.01], Observable::AtTime(1.0), Some(1))
            .unwrap();
        assert!(r.rows[0].outcome.as_ref().unwrap_err().contains("lambda must be positive"));
        assert!(r.rows[1].outcome.is_ok());
    }

    #[test]
    fn axis_checks() {
        let obs = Observable::AtTime(1.0);
        assert!(matches!(sweep_velocity(&base(), &[], obs), Err(HarnessError::EmptyGrid)));
        assert!(matches!(
            sweep_velocity(&base(), &[1.0, 1.0], obs),
            Err(HarnessError::AxisNotIncreasing(..))
        ));
        assert_eq!("detuning".parse::<SweepAxis>().unwrap(), SweepAxis::Detuning);
    }
}
