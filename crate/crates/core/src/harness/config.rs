//! Plain-text `key = value` run configuration.

use std::path::PathBuf;

use super::{HarnessError, InitialState, Scenario};
use crate::kernel::KernelBackend;
use crate::model::SystemParams;
use crate::volterra::SolverKind;

/// Partially specified run; unset fields fall back to defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub beta_omega0: Option<f64>,
    pub omega0: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub kernel: Option<KernelBackend>,
    pub solver: Option<SolverKind>,
    pub initial: Option<InitialState>,
    pub out: Option<PathBuf>,
}

fn bad(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        line,
        message: message.into(),
    }
}

fn number(line: usize, key: &str, value: &str) -> Result<f64, HarnessError> {
    value
        .parse()
        .map_err(|_| bad(line, format!("{key}: not a number: {value:?}")))
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config(text: &str) -> Result<RunConfig, HarnessError> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| bad(line, format!("expected key = value, got {content:?}")))?;
        let (key, value) = (key.trim().replace('-', "_"), value.trim());
        match key.as_str() {
            "lambda" => cfg.lambda = Some(number(line, &key, value)?),
            "delta" => cfg.delta = Some(number(line, &key, value)?),
            "beta_omega0" => cfg.beta_omega0 = Some(number(line, &key, value)?),
            "omega0" => cfg.omega0 = Some(number(line, &key, value)?),
            "t_max" => cfg.t_max = Some(number(line, &key, value)?),
            "dt" => cfg.dt = Some(number(line, &key, value)?),
            "kernel" => cfg.kernel = Some(value.parse().map_err(|e| bad(line, format!("{e}")))?),
            "solver" => cfg.solver = Some(value.parse().map_err(|e| bad(line, format!("{e}")))?),
            "initial" => cfg.initial = Some(value.parse().map_err(|e| bad(line, format!("{e}")))?),
            "out" => cfg.out = Some(PathBuf::from(value)),
            other => return Err(bad(line, format!("unknown key {other:?}"))),
        }
    }
    Ok(cfg)
}

impl RunConfig {
    /// Fields set in `overrides` win.
    pub fn merged_with(self, overrides: RunConfig) -> RunConfig {
        RunConfig {
            lambda: overrides.lambda.or(self.lambda),
            delta: overrides.delta.or(self.delta),
            beta_omega0: overrides.beta_omega0.or(self.beta_omega0),
            omega0: overrides.omega0.or(self.omega0),
            t_max: overrides.t_max.or(self.t_max),
            dt: overrides.dt.or(self.dt),
            kernel: overrides.kernel.or(self.kernel),
            solver: overrides.solver.or(self.solver),
            initial: overrides.initial.or(self.initial),
            out: overrides.out.or(self.out),
        }
    }

    pub fn params(&self) -> SystemParams {
        let d = SystemParams::default();
        SystemParams {
            lambda_over_gamma: self.lambda.unwrap_or(d.lambda_over_gamma),
            delta_over_gamma: self.delta.unwrap_or(d.delta_over_gamma),
            beta_omega0_over_gamma: self.beta_omega0.unwrap_or(d.beta_omega0_over_gamma),
            omega0_over_gamma: self.omega0.unwrap_or(d.omega0_over_gamma),
            t_max_gamma: self.t_max.unwrap_or(d.t_max_gamma),
            dt_gamma: self.dt.unwrap_or(d.dt_gamma),
        }
    }

    /// The quadrature backend implies the history solver unless one is
    /// named explicitly. Without `dt` the velocity-dependent default applies.
    pub fn scenario(&self, label: impl Into<String>) -> Scenario {
        let mut s = Scenario::new(label, self.params());
        s.kernel_backend = self.kernel.unwrap_or_default();
        s.solver = self.solver.unwrap_or(match s.kernel_backend {
            KernelBackend::Quadrature => SolverKind::History,
            KernelBackend::Residue => SolverKind::Aux,
        });
        if let Some(initial) = &self.initial {
            s.initial_state = initial.clone();
        }
        if let Some(dt) = self.dt {
            s = s.with_step(dt);
        }
        s
    }
}
