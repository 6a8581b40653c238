//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any
//! gating criterion fails.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use cavmotion_core::harness::{
    compare_kernels, run_scenario, selfcheck, sweep, write_sweep, Observable, Scenario,
    SweepAxis, SweepResult,
};
use cavmotion_core::kernel::{residue_kernel, ExponentialKernel, KernelBackend, QuadratureConfig};
use cavmotion_core::model::SystemParams;
use cavmotion_core::volterra::{
    solve_aux, solve_history, stationary_analytic, AmplitudeTrajectory, SolverKind, TimeGrid,
};
use num_complex::Complex64;

const FIGURES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];
const FIG2_FIG3_VELOCITIES: [f64; 8] = [0.0, 0.01, 0.1, 1.0, 10.0, 20.0, 30.0, 40.0];

struct Outcome {
    id: &'static str,
    title: &'static str,
    gating: bool,
    pass: bool,
    detail: String,
}

fn report(o: &Outcome) {
    let status = match (o.gating, o.pass) {
        (_, true) => "PASS",
        (true, false) => "FAIL",
        (false, false) => "INFO",
    };
    let kind = if o.gating { "" } else { " (non-gating)" };
    println!("{status} {}: {}{kind} | {}", o.id, o.title, o.detail);
}

fn lambda_grid() -> TimeGrid {
    TimeGrid::covering(100.0, 1e-3).unwrap()
}

fn max_relative_error(traj: &AmplitudeTrajectory, weight: f64, rate: f64) -> f64 {
    let w = Complex64::new(weight, 0.0);
    let mu = Complex64::new(rate, 0.0);
    let mut max_err: f64 = 0.0;
    let mut max_ref: f64 = 0.0;
    for (k, c) in traj.amplitude.iter().enumerate() {
        let reference = stationary_analytic(w, mu, traj.grid.time(k));
        max_err = max_err.max((c - reference).norm());
        max_ref = max_ref.max(reference.norm());
    }
    max_err / max_ref
}

fn ac1_stationary_oracle() -> Outcome {
    let lambda = 0.01;
    let weight = lambda / 4.0;
    let kernel = ExponentialKernel::single(Complex64::new(weight, 0.0), Complex64::new(lambda, 0.0))
        .unwrap();
    let grid = lambda_grid();

    let start = Instant::now();
    let aux = solve_aux(&kernel, grid).unwrap();
    let aux_time = start.elapsed();
    let start = Instant::now();
    let history = solve_history(&kernel, grid).unwrap();
    let history_time = start.elapsed();

    let aux_err = max_relative_error(&aux, weight, lambda);
    let history_err = max_relative_error(&history, weight, lambda);
    let pass = aux_err <= 1e-6
        && history_err <= 1e-4
        && aux_time < Duration::from_secs(1)
        && history_time < Duration::from_secs(60);
    Outcome {
        id: "AC1",
        title: "stationary analytic oracle",
        gating: true,
        pass,
        detail: format!(
            "aux rel err {aux_err:.3e} (≤1e-6) in {aux_time:.2?} (<1s); \
             history rel err {history_err:.3e} (≤1e-4) in {history_time:.2?} (<60s); {} steps",
            grid.n_steps
        ),
    }
}

fn ac2_bell_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut scenarios = 0;
    let mut failures = Vec::new();
    for name in FIGURES {
        for s in cavmotion_core::harness::figure_preset(name).unwrap() {
            scenarios += 1;
            match run_scenario(&s) {
                Ok(r) => {
                    for row in &r.rows {
                        let d = (row.concurrence - row.amplitude.norm_sqr().powi(2)).abs();
                        worst = worst.max(d);
                    }
                }
                Err(e) => failures.push(e.to_string()),
            }
        }
    }
    Outcome {
        id: "AC2",
        title: "Bell-state identity C = |C~|^4 on all figure presets",
        gating: true,
        pass: failures.is_empty() && worst <= 1e-12,
        detail: format!(
            "{scenarios} scenarios, max |C - |C~|^4| = {worst:.3e} (≤1e-12), {} failed runs",
            failures.len()
        ),
    }
}

fn first_zero(traj: &AmplitudeTrajectory) -> Option<f64> {
    traj.amplitude.windows(2).enumerate().find_map(|(k, w)| {
        let (a, b) = (w[0].re, w[1].re);
        (a > 0.0 && b <= 0.0).then(|| traj.grid.time(k) + traj.grid.dt_gamma * a / (a - b))
    })
}

fn ac3_first_collapse() -> Outcome {
    let lambda = 0.01;
    let grid = lambda_grid();
    let zero_for = |weight: f64| {
        let k = ExponentialKernel::single(Complex64::new(weight, 0.0), Complex64::new(lambda, 0.0))
            .unwrap();
        first_zero(&solve_aux(&k, grid).unwrap())
    };
    let quarter = zero_for(lambda / 4.0);
    let half = zero_for(lambda / 2.0);
    // The moving-qubit model at rest reduces to one of the two hypotheses.
    let model = first_zero(&solve_aux(&residue_kernel(&SystemParams::new(lambda, 0.0, 0.0)), grid).unwrap());
    let within = |z: Option<f64>, target: f64| z.is_some_and(|z| (z - target).abs() <= 0.05);
    let matches = match model {
        Some(m) if within(Some(m), 33.588) => "W = gamma*lambda/4",
        Some(m) if within(Some(m), 23.273) => "W = gamma*lambda/2",
        _ => "neither",
    };
    Outcome {
        id: "AC3",
        title: "first concurrence collapse time",
        gating: true,
        pass: within(quarter, 33.588) && within(half, 23.273) && matches != "neither",
        detail: format!(
            "W=λ/4: {:.4} (33.588±0.05); W=λ/2: {:.4} (23.273±0.05); \
             residue kernel at rest: {:.4} → normalization {matches}",
            quarter.unwrap_or(f64::NAN),
            half.unwrap_or(f64::NAN),
            model.unwrap_or(f64::NAN),
        ),
    }
}

fn ac4_kernel_cross_backend() -> Outcome {
    let start = Instant::now();
    let lags: Vec<f64> = (0..100).map(|k| 50.0 * k as f64 / 99.0).collect();
    let config = QuadratureConfig::default().without_boundary_term();
    let mut worst = (0.0, (0.0, 0.0, 0.0));
    let mut errors = Vec::new();
    for lambda in [0.01, 0.1, 1.0] {
        for delta in [0.0, 0.5] {
            for bw in [0.0, 1.0, 10.0] {
                let p = SystemParams::new(lambda, delta, bw);
                match compare_kernels(&p, &lags, config) {
                    Ok(c) if c.max_relative > worst.0 => worst = (c.max_relative, (lambda, delta, bw)),
                    Ok(_) => {}
                    Err(e) => errors.push(e.to_string()),
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        id: "AC4",
        title: "quadrature vs residue kernel at desk scale",
        gating: true,
        pass: errors.is_empty() && worst.0 <= 1e-3 && elapsed < Duration::from_secs(300),
        detail: format!(
            "18 parameter sets x 100 lags, max |dF|/|F(0)| = {:.3e} (≤1e-3) at (λ,Δ,βω0)={:?}; \
             {elapsed:.2?} (<300s); {} errors",
            worst.0,
            worst.1,
            errors.len()
        ),
    }
}

fn ac5_solver_cross_check() -> Outcome {
    let grid = lambda_grid();
    let mut worst: (f64, f64) = (0.0, 0.0);
    let mut errors = Vec::new();
    for bw in FIG2_FIG3_VELOCITIES {
        let kernel = residue_kernel(&SystemParams::new(0.01, 0.0, bw));
        match (solve_aux(&kernel, grid), solve_history(&kernel, grid)) {
            (Ok(a), Ok(h)) => {
                let d = a.max_deviation(&h);
                if d > worst.0 {
                    worst = (d, bw);
                }
            }
            (a, h) => errors.push(format!("{:?} {:?}", a.err(), h.err())),
        }
    }
    Outcome {
        id: "AC5",
        title: "history vs aux solver on the two-branch kernel",
        gating: true,
        pass: errors.is_empty() && worst.0 <= 1e-4,
        detail: format!(
            "8 velocities at dt=1e-3, max |dC~| = {:.3e} (≤1e-4) at βω0={}",
            worst.0, worst.1
        ),
    }
}

fn scenario(lambda: f64, delta: f64, bw: f64) -> Scenario {
    Scenario::new("s", SystemParams::new(lambda, delta, bw))
}

fn mean_concurrence(s: &Scenario) -> f64 {
    run_scenario(s).unwrap().mean_concurrence(0.0, 100.0)
}

fn ac6_protection_ordering() -> Outcome {
    let means: Vec<f64> = [0.0, 0.01, 0.1, 1.0]
        .iter()
        .map(|&bw| mean_concurrence(&scenario(0.01, 0.0, bw)))
        .collect();
    let end = run_scenario(&scenario(0.01, 0.0, 1.0)).unwrap().concurrence_at(100.0);
    let ordered = means[3] > means[2] && means[2] > means[1] && means[1] >= means[0];
    Outcome {
        id: "AC6",
        title: "entanglement protection ordering",
        gating: true,
        pass: ordered && end >= 0.9,
        detail: format!(
            "mean C over [0,100]: βω0=0 {:.4}, 0.01 {:.4}, 0.1 {:.4}, 1 {:.4}; C(βω0=1, t=100) = {end:.4} (≥0.9)",
            means[0], means[1], means[2], means[3]
        ),
    }
}

fn ac7_decay_rate_signature() -> Outcome {
    let r = run_scenario(&scenario(0.01, 0.0, 0.0)).unwrap();
    let rates = &r.rates;
    let sign_changes = rates.gamma_sign_changes();
    let all_finite = rates.gamma_t.iter().flatten().all(|g| g.is_finite());
    let mask_exact = r
        .trajectory
        .amplitude
        .iter()
        .enumerate()
        .all(|(k, c)| rates.is_masked(k) == (c.norm() < cavmotion_core::dynamics::RATE_MASK_THRESHOLD));
    // Every zero of C~ sits next to the largest-magnitude rate in its
    // neighbourhood, positive on one side and negative on the other.
    let mut spikes_at_zeros = true;
    let mut zeros = 0;
    let n = r.trajectory.amplitude.len();
    for k in 1..n {
        let (a, b) = (r.trajectory.amplitude[k - 1].re, r.trajectory.amplitude[k].re);
        if a.signum() != b.signum() {
            zeros += 1;
            let lo = k.saturating_sub(2000);
            let hi = (k + 2000).min(n - 1);
            let window_max = (lo..=hi)
                .filter_map(|j| rates.gamma_t[j])
                .map(f64::abs)
                .fold(0.0, f64::max);
            let local = [k - 1, k]
                .iter()
                .filter_map(|&j| rates.gamma_t[j])
                .map(f64::abs)
                .fold(0.0, f64::max);
            let before = rates.gamma_t[k - 1].unwrap_or(0.0);
            let after = rates.gamma_t[k].unwrap_or(0.0);
            if local < window_max || before.signum() == after.signum() {
                spikes_at_zeros = false;
            }
        }
    }
    Outcome {
        id: "AC7",
        title: "non-Markovian decay-rate signature",
        gating: true,
        pass: sign_changes >= 2 && all_finite && mask_exact && zeros > 0 && spikes_at_zeros,
        detail: format!(
            "{sign_changes} sign changes of Gamma (≥2); {zeros} amplitude zeros, spikes at zeros: {spikes_at_zeros}; \
             mask matches |C~|<1e-8: {mask_exact}; finite elsewhere: {all_finite}"
        ),
    }
}

fn ac8_detuning_protection() -> Outcome {
    let means: Vec<f64> = [0.01, 0.05, 0.1, 0.5]
        .iter()
        .map(|&delta| mean_concurrence(&scenario(0.01, delta, 0.0)))
        .collect();
    let monotone = means.windows(2).all(|w| w[1] > w[0]);
    Outcome {
        id: "AC8",
        title: "detuning protection for resting qubits",
        gating: true,
        pass: monotone,
        detail: format!("mean C over [0,100] for Δ = 0.01, 0.05, 0.1, 0.5: {means:.4?}"),
    }
}

fn ac9_invariant_suites() -> Outcome {
    let reports = selfcheck::invariant_suite(20_240_601, 10_000);
    let pass = reports.iter().all(|r| r.passed());
    let detail = reports
        .iter()
        .map(|r| {
            format!(
                "{}: {}/{} violations, worst {:.2e} (tol {:.0e})",
                r.name, r.violations, r.trials, r.worst, r.tolerance
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        id: "AC9",
        title: "randomized invariant suites",
        gating: true,
        pass,
        detail,
    }
}

fn alternation(result: &SweepResult) -> Option<bool> {
    let v: Option<Vec<f64>> = result.values().into_iter().collect();
    let v = v?;
    Some(v[0] > v[1] && v[1] < v[2] && v[2] > v[3])
}

fn ac10_velocity_sweep() -> Outcome {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&out).unwrap();
    let grid = [10.0, 20.0, 30.0, 40.0];
    let at = Observable::AtTime(100.0);

    let residue_base = Scenario::new("residue", SystemParams::new(0.01, 0.0, 0.0));
    let quadrature_base = Scenario::new("quadrature", SystemParams::new(0.01, 0.0, 0.0))
        .with_backend(KernelBackend::Quadrature, SolverKind::History)
        .with_step(1e-3);

    let mut parts = Vec::new();
    let mut all_ran = true;
    for base in [&residue_base, &quadrature_base] {
        match sweep(base, SweepAxis::Velocity, &grid, at, None) {
            Ok(result) => {
                let _ = write_sweep(&result, base, &out.join(format!("velocity_sweep_{}", base.label)));
                let values: Vec<String> = result
                    .values()
                    .iter()
                    .map(|v| v.map_or("failed".into(), |x| format!("{x:.6}")))
                    .collect();
                let observed = match alternation(&result) {
                    Some(true) => "observed",
                    Some(false) => "not observed",
                    None => {
                        all_ran = false;
                        "undetermined"
                    }
                };
                parts.push(format!(
                    "{} ({}): C(100) at βω0=10,20,30,40 = [{}], alternation {observed}",
                    base.kernel_backend,
                    base.solver,
                    values.join(", ")
                ));
            }
            Err(e) => {
                all_ran = false;
                parts.push(format!("{}: {e}", base.kernel_backend));
            }
        }
    }
    parts.push(format!("CSV in {}", out.display()));
    Outcome {
        id: "AC10",
        title: "exploratory velocity sweep with both kernel backends",
        gating: false,
        pass: all_ran,
        detail: parts.join("; "),
    }
}

fn main() {
    let criteria: [fn() -> Outcome; 10] = [
        ac1_stationary_oracle,
        ac2_bell_identity,
        ac3_first_collapse,
        ac4_kernel_cross_backend,
        ac5_solver_cross_check,
        ac6_protection_ordering,
        ac7_decay_rate_signature,
        ac8_detuning_protection,
        ac9_invariant_suites,
        ac10_velocity_sweep,
    ];
    let mut failed = 0;
    for criterion in criteria {
        let outcome = criterion();
        report(&outcome);
        if outcome.gating && !outcome.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} gating criteria, {failed} failed",
        criteria.len() - 1
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
