//! Cross-checks between kernel backends and between solvers.

use std::time::{Duration, Instant};

use super::HarnessError;
use crate::kernel::{residue_kernel, MemoryKernel, QuadratureConfig, QuadratureKernel};
use crate::model::{desk_scale_geometry, SystemParams};
use crate::volterra::{solve_aux, solve_history, TimeGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct KernelComparison {
    pub lags: usize,
    pub max_abs: f64,
    /// `|F(0)|` of the residue kernel; deviations are relative to it.
    pub scale: f64,
    pub max_relative: f64,
    pub worst_lag: f64,
    pub elapsed: Duration,
}

/// Residue kernel against adaptive quadrature at `F(lag, 0)`.
pub fn compare_kernels(
    params: &SystemParams,
    lags: &[f64],
    config: QuadratureConfig,
) -> Result<KernelComparison, HarnessError> {
    let start = Instant::now();
    let params = params.validate()?;
    let residue = residue_kernel(&params);
    let quadrature = QuadratureKernel::new(params, desk_scale_geometry(&params), config)?;
    let scale = residue.eval(0.0)?.norm();
    let mut max_abs = 0.0;
    let mut worst_lag = 0.0;
    for &lag in lags {
        let d = (quadrature.eval(lag, 0.0)? - residue.eval(lag)?).norm();
        if d > max_abs {
            max_abs = d;
            worst_lag = lag;
        }
    }
    Ok(KernelComparison {
        lags: lags.len(),
        max_abs,
        scale,
        max_relative: max_abs / scale,
        worst_lag,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverComparison {
    pub max_abs: f64,
    pub worst_time: f64,
    pub history_elapsed: Duration,
    pub aux_elapsed: Duration,
}

/// History and auxiliary solvers on the residue kernel over the parameter
/// horizon.
pub fn compare_solvers(params: &SystemParams) -> Result<SolverComparison, HarnessError> {
    let params = params.validate()?;
    let kernel = residue_kernel(&params);
    let grid = TimeGrid::covering(params.t_max_gamma, params.dt_gamma)?;
    let start = Instant::now();
    let aux = solve_aux(&kernel, grid)?;
    let aux_elapsed = start.elapsed();
    let start = Instant::now();
    let history = solve_history(&kernel, grid)?;
    let history_elapsed = start.elapsed();
    let (k, max_abs) = aux
        .amplitude
        .iter()
        .zip(&history.amplitude)
        .map(|(a, b)| (a - b).norm())
        .enumerate()
        .fold((0, 0.0), |acc, (k, d)| if d > acc.1 { (k, d) } else { acc });
    Ok(SolverComparison {
        max_abs,
        worst_time: grid.time(k),
        history_elapsed,
        aux_elapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_agree_without_boundary_term() {
        let p = SystemParams::new(0.1, 0.5, 1.0);
        let lags: Vec<f64> = (0..20).map(|k| k as f64 * 2.5).collect();
        let c = compare_kernels(&p, &lags, QuadratureConfig::default().without_boundary_term()).unwrap();
        assert_eq!(c.lags, 20);
        assert!(c.max_relative < 1e-3, "{c:?}");
        assert!((c.scale - 0.025).abs() < 1e-15);
    }

    #[test]
    fn solvers_agree() {
        let p = SystemParams::new(0.01, 0.0, 1.0).with_horizon(20.0, 1e-2);
        let c = compare_solvers(&p).unwrap();
        assert!(c.max_abs < 1e-4, "{c:?}");
    }

    #[test]
    fn invalid_params_rejected() {
        let p = SystemParams::new(0.0, 0.0, 1.0);
        assert!(matches!(compare_solvers(&p), Err(HarnessError::Model(_))));
    }
}
