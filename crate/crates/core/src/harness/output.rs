//! CSV tables, gnuplot scripts and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::presets::{FigureLayout, PlotQuantity};
use super::{HarnessError, Scenario, ScenarioResult, StepRule, SweepResult};
use crate::kernel::KernelBackend;

pub const CSV_HEADER: &str = "gamma_t,re_c,im_c,abs_c,pop_e,concurrence,gamma_rate,lamb_shift";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Time series as CSV; masked rates are empty cells.
pub fn format_csv(result: &ScenarioResult) -> String {
    let mut out = String::with_capacity(result.rows.len() * 200);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(r.gamma_t),
            num(r.amplitude.re),
            num(r.amplitude.im),
            num(r.amplitude.norm()),
            num(r.pop_e),
            num(r.concurrence),
            opt(r.gamma_rate),
            opt(r.lamb_shift),
        );
    }
    out
}

fn scenario_manifest(out: &mut String, s: &Scenario) {
    let p = s.effective_params();
    let _ = writeln!(out, "[{}]", s.label);
    let _ = writeln!(out, "lambda = {:?}", p.lambda_over_gamma);
    let _ = writeln!(out, "delta = {:?}", p.delta_over_gamma);
    let _ = writeln!(out, "beta_omega0 = {:?}", p.beta_omega0_over_gamma);
    let _ = writeln!(out, "omega0 = {:?}", p.omega0_over_gamma);
    let _ = writeln!(out, "t_max = {:?}", p.t_max_gamma);
    let _ = writeln!(out, "dt = {:?}", p.dt_gamma);
    let rule = match s.step_rule {
        StepRule::Auto => "auto",
        StepRule::Fixed => "fixed",
    };
    let _ = writeln!(out, "step_rule = {rule}");
    let _ = writeln!(out, "kernel = {}", s.kernel_backend);
    let _ = writeln!(out, "solver = {}", s.solver);
    let _ = writeln!(out, "initial = {}", s.initial_state.name());
    if s.kernel_backend == KernelBackend::Quadrature {
        let q = &s.quadrature;
        let _ = writeln!(out, "quadrature.window_halfwidth_lambdas = {:?}", q.window_halfwidth_lambdas);
        let _ = writeln!(out, "quadrature.rel_tol = {:?}", q.rel_tol);
        let _ = writeln!(out, "quadrature.include_boundary_term = {}", q.include_boundary_term);
        let _ = writeln!(out, "quadrature.truncate_at_zero = {}", q.truncate_at_zero);
        let _ = writeln!(out, "quadrature.panel_budget = {}", q.panel_budget);
    }
    out.push('\n');
}

/// Every parameter needed to regenerate the listed scenarios.
pub fn manifest_text<'a>(scenarios: impl IntoIterator<Item = &'a Scenario>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "artifact = {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    out.push('\n');
    for s in scenarios {
        scenario_manifest(&mut out, s);
    }
    out
}

fn curve_title(s: &Scenario) -> String {
    let p = &s.params;
    format!(
        "bw={} lambda={} delta={}",
        p.beta_omega0_over_gamma, p.lambda_over_gamma, p.delta_over_gamma
    )
}

/// gnuplot script for a figure. CSV names are relative to the script.
pub fn plot_script(layout: &FigureLayout) -> String {
    let name = layout.name.as_str();
    let mut out = String::new();
    out.push_str("set datafile separator \",\"\n");
    let _ = writeln!(out, "set terminal pngcairo size 1000,{}", 350 * layout.panels.len().max(2) / 2 + 350);
    let _ = writeln!(out, "set output \"{name}.png\"");
    match layout.quantity {
        PlotQuantity::ConcurrenceVsVelocity { at_gamma_t } => {
            out.push_str("set xlabel \"beta omega0 / gamma\"\n");
            let _ = writeln!(out, "set ylabel \"C at gamma t = {at_gamma_t}\"");
            let _ = writeln!(
                out,
                "plot \"{name}_sweep.csv\" using 1:2 with linespoints dashtype 3 pointtype 3 notitle"
            );
            return out;
        }
        PlotQuantity::Concurrence => out.push_str("set ylabel \"concurrence\"\n"),
        PlotQuantity::DecayRate => out.push_str("set ylabel \"Gamma / gamma\"\n"),
    }
    out.push_str("set xlabel \"gamma t\"\n");
    let column = match layout.quantity {
        PlotQuantity::DecayRate => 7,
        _ => 6,
    };
    if layout.panels.len() > 1 {
        let _ = writeln!(out, "set multiplot layout 2,{}", layout.panels.len().div_ceil(2));
    }
    for panel in &layout.panels {
        let _ = writeln!(out, "set title \"{}\"", panel.title);
        let curves: Vec<String> = panel
            .scenarios
            .iter()
            .map(|s| {
                format!(
                    "\"{}.csv\" using 1:{column} with lines title \"{}\"",
                    s.label,
                    curve_title(s)
                )
            })
            .collect();
        let _ = writeln!(out, "plot {}", curves.join(", \\\n     "));
    }
    if layout.panels.len() > 1 {
        out.push_str("unset multiplot\n");
    }
    out
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, HarnessError> {
    fs::write(&path, contents).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// `<prefix>.csv`, `<prefix>.gp` and `<prefix>.manifest` for one run.
pub fn write_outputs(result: &ScenarioResult, prefix: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if let Some(parent) = prefix.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    let stem = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| result.scenario.label.clone());
    let script = format!(
        "set datafile separator \",\"\nset terminal pngcairo size 1000,600\nset output \"{stem}.png\"\n\
         set xlabel \"gamma t\"\nset ylabel \"concurrence\"\n\
         plot \"{stem}.csv\" using 1:6 with lines title \"{}\"\n",
        curve_title(&result.scenario)
    );
    Ok(vec![
        write_file(with_suffix(prefix, ".csv"), &format_csv(result))?,
        write_file(with_suffix(prefix, ".gp"), &script)?,
        write_file(with_suffix(prefix, ".manifest"), &manifest_text([&result.scenario]))?,
    ])
}

/// One CSV per scenario plus the figure's plot script and manifest.
pub fn write_figure(
    layout: &FigureLayout,
    results: &[ScenarioResult],
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    ensure_dir(dir)?;
    let name = layout.name.as_str();
    let mut written = Vec::new();
    for r in results {
        written.push(write_file(dir.join(format!("{}.csv", r.scenario.label)), &format_csv(r))?);
    }
    if let PlotQuantity::ConcurrenceVsVelocity { at_gamma_t } = layout.quantity {
        let mut table = String::from("beta_omega0,concurrence\n");
        for r in results {
            let _ = writeln!(
                table,
                "{},{}",
                num(r.params.beta_omega0_over_gamma),
                num(r.concurrence_at(at_gamma_t))
            );
        }
        written.push(write_file(dir.join(format!("{name}_sweep.csv")), &table)?);
    }
    written.push(write_file(dir.join(format!("{name}.gp")), &plot_script(layout))?);
    written.push(write_file(
        dir.join(format!("{name}.manifest")),
        &manifest_text(results.iter().map(|r| &r.scenario)),
    )?);
    Ok(written)
}

/// Sweep table and manifest; failed points keep their message.
pub fn write_sweep(
    result: &SweepResult,
    base: &Scenario,
    prefix: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    if let Some(parent) = prefix.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    let mut table = format!("{},dt,value,final_concurrence,mean_concurrence,error\n", result.axis);
    for row in &result.rows {
        match &row.outcome {
            Ok(p) => {
                let _ = writeln!(
                    table,
                    "{},{},{},{},{},",
                    num(row.axis_value),
                    num(row.dt_gamma),
                    num(p.value),
                    num(p.final_concurrence),
                    num(p.mean_concurrence)
                );
            }
            Err(e) => {
                let _ = writeln!(
                    table,
                    "{},{},,,,\"{}\"",
                    num(row.axis_value),
                    num(row.dt_gamma),
                    e.replace('"', "'")
                );
            }
        }
    }
    let mut manifest = manifest_text([base]);
    let _ = writeln!(manifest, "sweep.axis = {}", result.axis);
    let _ = writeln!(manifest, "sweep.observable = {:?}", result.observable);
    let _ = writeln!(
        manifest,
        "sweep.grid = {}",
        result.rows.iter().map(|r| format!("{:?}", r.axis_value)).collect::<Vec<_>>().join(",")
    );
    Ok(vec![
        write_file(with_suffix(prefix, ".csv"), &table)?,
        write_file(with_suffix(prefix, ".manifest"), &manifest)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets::{figure_layout, FigureName};
    use crate::harness::{run_scenario, sweep_velocity, Observable};
    use crate::model::SystemParams;

    fn short(label: &str, bw: f64) -> Scenario {
        let mut s = Scenario::new(label, SystemParams::new(0.01, 0.0, bw)).with_step(0.05);
        s.params.t_max_gamma = 40.0;
        s
    }

    #[test]
    fn csv_schema_and_masking() {
        let r = run_scenario(&short("s", 0.0)).unwrap();
        let csv = format_csv(&r);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 8);
        assert_eq!(first[0], "0.0000000000000000e0");
        assert_eq!(first[5].parse::<f64>().unwrap(), 1.0);
        assert!(!csv.contains("NaN") && !csv.contains("nan"));
        // Every numeric cell round-trips exactly.
        for (line, row) in csv.lines().skip(1).zip(&r.rows) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells[1].parse::<f64>().unwrap().to_bits(), row.amplitude.re.to_bits());
            assert_eq!(cells[5].parse::<f64>().unwrap().to_bits(), row.concurrence.to_bits());
        }
    }

    #[test]
    fn masked_rates_are_empty_cells() {
        let mut r = run_scenario(&short("s", 0.0)).unwrap();
        r.rows[3].gamma_rate = None;
        r.rows[3].lamb_shift = None;
        let line = format_csv(&r).lines().nth(4).unwrap().to_string();
        assert!(line.ends_with(",,"), "{line}");
    }

    #[test]
    fn figure_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut layout = figure_layout(FigureName::Fig2, false);
        for s in layout.panels[0].scenarios.iter_mut() {
            *s = short(&s.label.clone(), s.params.beta_omega0_over_gamma);
        }
        let results: Vec<_> = layout.scenarios().map(|s| run_scenario(s).unwrap()).collect();
        let files = write_figure(&layout, &results, dir.path()).unwrap();
        let csvs = files.iter().filter(|p| p.extension().unwrap() == "csv").count();
        let scripts = files.iter().filter(|p| p.extension().unwrap() == "gp").count();
        assert_eq!((csvs, scripts), (4, 1));
        let script = fs::read_to_string(dir.path().join("fig2.gp")).unwrap();
        assert_eq!(script.matches(".csv\" using 1:6").count(), 4);
        let manifest = fs::read_to_string(dir.path().join("fig2.manifest")).unwrap();
        assert!(manifest.contains("kernel = residue"));
        assert!(manifest.contains("solver = aux"));
    }

    #[test]
    fn multi_panel_script() {
        let layout = figure_layout(FigureName::Fig5, false);
        let script = plot_script(&layout);
        assert!(script.contains("set multiplot layout 2,2"));
        assert_eq!(script.matches("using 1:7").count(), 8);
        let fig4 = plot_script(&figure_layout(FigureName::Fig4, false));
        assert!(fig4.contains("fig4_sweep.csv"));
    }

    #[test]
    fn single_run_and_sweep_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_scenario(&short("one", 1.0)).unwrap();
        let files = write_outputs(&r, &dir.path().join("nested/run")).unwrap();
        assert_eq!(files.len(), 3);
        assert!(fs::read_to_string(&files[2]).unwrap().contains("beta_omega0 = 1.0"));

        let base = short("sw", 0.0);
        let sweep = sweep_velocity(&base, &[0.0, 1.0], Observable::AtTime(40.0)).unwrap();
        let files = write_sweep(&sweep, &base, &dir.path().join("sweep")).unwrap();
        let table = fs::read_to_string(&files[0]).unwrap();
        assert!(table.starts_with("beta_omega0,dt,value,"));
        assert_eq!(table.lines().count(), 3);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "").unwrap();
        let r = run_scenario(&short("s", 0.0)).unwrap();
        let err = write_outputs(&r, &blocker.join("x")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }

    #[test]
    fn output_is_deterministic() {
        let a = format_csv(&run_scenario(&short("s", 0.3)).unwrap());
        let b = format_csv(&run_scenario(&short("s", 0.3)).unwrap());
        assert_eq!(a, b);
    }
}
