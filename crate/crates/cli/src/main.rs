use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cavmotion_core::harness::{
    compare_kernels, compare_solvers, figure_layout, parse_config, run_scenario, selfcheck, sweep,
    write_figure, write_outputs, write_sweep, FigureName, HarnessError, InitialState, Observable,
    RunConfig, SweepAxis,
};
use cavmotion_core::kernel::{KernelBackend, QuadratureConfig};
use cavmotion_core::model::{check_feasibility, coupling_regime, desk_scale_geometry};
use cavmotion_core::volterra::SolverKind;

#[derive(Parser)]
#[command(name = "cavmotion", version, about = "Entanglement dynamics of qubits moving through leaky cavities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write CSV, plot script and manifest.
    Simulate(RunArgs),
    /// Run every scenario of a figure preset.
    Figure {
        /// fig2, fig3, fig4, fig5, fig6 or fig7.
        name: FigureName,
        /// Output directory.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Extend the fig4 velocity grid to 100γ.
        #[arg(long)]
        full_range: bool,
    },
    /// Sweep one parameter and tabulate a concurrence observable.
    Sweep {
        /// velocity, bandwidth or detuning.
        #[arg(long, default_value = "velocity")]
        axis: SweepAxis,
        /// Strictly increasing, comma-separated grid.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Concurrence at this γt (defaults to the horizon).
        #[arg(long, conflicts_with = "mean")]
        at: Option<f64>,
        /// Time-averaged concurrence over the whole run.
        #[arg(long)]
        mean: bool,
        /// Worker threads.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check parameters, physical feasibility and numerical invariants.
    Validate {
        /// Randomized trials per invariant suite.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare kernel backends and solvers for one parameter set.
    CompareBackends {
        /// Number of lags in [0, 50] for the kernel comparison.
        #[arg(long, default_value_t = 100)]
        lags: usize,
        /// Skip the history-vs-aux solver comparison.
        #[arg(long)]
        kernels_only: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long)]
    beta_omega0: Option<f64>,
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// residue or quadrature.
    #[arg(long)]
    kernel: Option<KernelBackend>,
    /// history or aux.
    #[arg(long)]
    solver: Option<SolverKind>,
    /// bell-psi.
    #[arg(long)]
    initial: Option<InitialState>,
    /// Output path prefix.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig, HarnessError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_config(&text)?
            }
            None => RunConfig::default(),
        };
        Ok(file.merged_with(RunConfig {
            lambda: self.lambda,
            delta: self.delta,
            beta_omega0: self.beta_omega0,
            omega0: self.omega0,
            t_max: self.t_max,
            dt: self.dt,
            kernel: self.kernel,
            solver: self.solver,
            initial: self.initial,
            out: self.out,
        }))
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn simulate(run: RunArgs) -> Result<(), HarnessError> {
    let cfg = run.resolve()?;
    let prefix = cfg.out.clone().unwrap_or_else(|| PathBuf::from("run"));
    let label = prefix
        .file_name()
        .map_or("run".into(), |s| s.to_string_lossy().into_owned());
    let result = run_scenario(&cfg.scenario(label))?;
    let last = result.rows.last().expect("grid has at least two nodes");
    println!(
        "kernel={} solver={} dt={} steps={}",
        result.scenario.kernel_backend,
        result.scenario.solver,
        result.params.dt_gamma,
        result.trajectory.grid.n_steps
    );
    println!(
        "gamma_t={} |C|={:.6} concurrence={:.6} mean_concurrence={:.6}",
        last.gamma_t,
        last.amplitude.norm(),
        last.concurrence,
        result.mean_concurrence(0.0, last.gamma_t)
    );
    print_paths(&write_outputs(&result, &prefix)?);
    Ok(())
}

fn figure(name: FigureName, out: &Path, full_range: bool) -> Result<(), HarnessError> {
    let layout = figure_layout(name, full_range);
    let mut results = Vec::new();
    for s in layout.scenarios() {
        let r = run_scenario(s)?;
        println!(
            "{}: concurrence at end {:.6}",
            s.label,
            r.rows.last().map_or(f64::NAN, |row| row.concurrence)
        );
        results.push(r);
    }
    print_paths(&write_figure(&layout, &results, out)?);
    Ok(())
}

fn run_sweep(
    axis: SweepAxis,
    values: &[f64],
    at: Option<f64>,
    mean: bool,
    threads: Option<usize>,
    run: RunArgs,
) -> Result<(), HarnessError> {
    let cfg = run.resolve()?;
    let prefix = cfg.out.clone().unwrap_or_else(|| PathBuf::from("sweep"));
    let base = cfg.scenario("sweep");
    let horizon = base.params.t_max_gamma;
    let observable = if mean {
        Observable::TimeAverage { from: 0.0, to: horizon }
    } else {
        Observable::AtTime(at.unwrap_or(horizon))
    };
    let result = sweep(&base, axis, values, observable, threads)?;
    for row in &result.rows {
        match &row.outcome {
            Ok(p) => println!("{}={} value={:.6}", axis, row.axis_value, p.value),
            Err(e) => println!("{}={} failed: {e}", axis, row.axis_value),
        }
    }
    print_paths(&write_sweep(&result, &base, &prefix)?);
    Ok(())
}

/// Returns whether every invariant suite passed. Feasibility problems are
/// warnings only.
fn validate(trials: usize, run: RunArgs) -> Result<bool, HarnessError> {
    let cfg = run.resolve()?;
    let scenario = cfg.scenario("validate");
    let params = scenario.validate()?;
    let mut warnings = 0;
    println!("parameters: ok");

    let feasibility = check_feasibility(params.beta_omega0_over_gamma)?;
    println!(
        "velocity: {:e} m/s, de Broglie ratio {:e}",
        feasibility.velocity_mps, feasibility.de_broglie_ratio
    );
    if feasibility.velocity_mps > 0.0 && !feasibility.recoil_ok {
        warnings += 1;
        eprintln!(
            "warning: recoil bound violated: v = {:e} m/s must exceed 1e-7 m/s",
            feasibility.velocity_mps
        );
    }
    if !feasibility.classical_ok {
        warnings += 1;
        eprintln!(
            "warning: classical-motion bound violated: de Broglie ratio {:e}",
            feasibility.de_broglie_ratio
        );
    }
    println!("coupling regime: {:?}", coupling_regime(params.lambda_over_gamma)?);
    let geometry = desk_scale_geometry(&params);
    println!(
        "desk-scale cavity: mode n = {}, tau = {} (exit at gamma_t = {})",
        geometry.n_mode,
        geometry.tau_gamma,
        geometry.exit_time(&params)
    );

    let mut failed = 0;
    for r in selfcheck::invariant_suite(1, trials) {
        println!(
            "{}: {} ({}/{} violations, worst {:.2e})",
            r.name,
            if r.passed() { "ok" } else { "FAILED" },
            r.violations,
            r.trials,
            r.worst
        );
        if !r.passed() {
            failed += 1;
        }
    }
    println!("warnings: {warnings}");
    if failed > 0 {
        eprintln!("error: {failed} invariant suites failed");
    }
    Ok(failed == 0)
}

fn compare(lags: usize, kernels_only: bool, run: RunArgs) -> Result<(), HarnessError> {
    let cfg = run.resolve()?;
    let params = cfg.scenario("compare").validate()?;
    let grid: Vec<f64> = (0..lags)
        .map(|k| 50.0 * k as f64 / (lags.max(2) - 1) as f64)
        .collect();
    let k = compare_kernels(&params, &grid, QuadratureConfig::default().without_boundary_term())?;
    println!(
        "kernel residue vs quadrature: {} lags in [0, 50], max |dF| = {:.3e}, max relative deviation = {:.3e} (worst lag {:.3}, {:.2?})",
        k.lags, k.max_abs, k.max_relative, k.worst_lag, k.elapsed
    );
    if !kernels_only {
        let s = compare_solvers(&params)?;
        println!(
            "solver history vs aux: dt = {}, max |dC| = {:.3e} at gamma_t = {:.3} (history {:.2?}, aux {:.2?})",
            params.dt_gamma, s.max_abs, s.worst_time, s.history_elapsed, s.aux_elapsed
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(run) => simulate(run),
        Command::Figure {
            name,
            out,
            full_range,
        } => figure(name, &out, full_range),
        Command::Sweep {
            axis,
            values,
            at,
            mean,
            threads,
            run,
        } => run_sweep(axis, &values, at, mean, threads, run),
        Command::Validate { trials, run } => match validate(trials, run) {
            Ok(false) => return ExitCode::FAILURE,
            other => other.map(|_| ()),
        },
        Command::CompareBackends {
            lags,
            kernels_only,
            run,
        } => compare(lags, kernels_only, run),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
