//! Solvers for the rotating-frame amplitude equation
//!
//! ```text
//! dC̃/dt + ∫₀ᵗ F(t,t′) C̃(t′) dt′ = 0,    C̃(0) = 1.
//! ```
//!
//! [`solve_history`] works for any kernel and costs O(N²);
//! [`solve_aux`] exploits an exponential-sum kernel and costs O(N).
//! [`stationary_analytic`] is the closed form for a single exponential.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::kernel::{ExponentialKernel, KernelError, MemoryKernel};

/// Amplitude magnitude beyond which a run is aborted.
pub const BLOW_UP_THRESHOLD: f64 = 1.0 + 1e-3;

/// Physical bound checked on converged runs.
pub const CONTRACTIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("amplitude blew up at γt = {t}: |C̃| = {magnitude}")]
    BlowUp { t: f64, magnitude: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("unknown solver '{0}' (expected history or aux)")]
    UnknownSolver(String),
}

/// Uniform grid `t_k = k·dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt_gamma: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt_gamma: f64, n_steps: usize) -> Result<Self, SolverError> {
        if !(dt_gamma > 0.0 && dt_gamma.is_finite()) {
            return Err(SolverError::InvalidGrid(format!(
                "dt must be positive, got {dt_gamma}"
            )));
        }
        if n_steps == 0 {
            return Err(SolverError::InvalidGrid("n_steps must be positive".into()));
        }
        Ok(Self { dt_gamma, n_steps })
    }

    /// Smallest grid with `n_steps·dt ≥ t_max`.
    pub fn covering(t_max: f64, dt_gamma: f64) -> Result<Self, SolverError> {
        if !(t_max > 0.0) {
            return Err(SolverError::InvalidGrid(format!(
                "t_max must be positive, got {t_max}"
            )));
        }
        let ratio = t_max / dt_gamma;
        // Absorb representation error in e.g. 100 / 1e-3.
        let n = (ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as usize;
        Self::new(dt_gamma, n)
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt_gamma
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps)
    }

    /// Index of the node closest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.dt_gamma).round().max(0.0) as usize).min(self.n_steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }
}

/// `C̃(t)` and `dC̃/dt` on a grid. The derivative comes from the equation's
/// right-hand side, not from differencing.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub grid: TimeGrid,
    pub amplitude: Vec<Complex64>,
    pub derivative: Vec<Complex64>,
}

impl AmplitudeTrajectory {
    pub fn max_abs(&self) -> f64 {
        self.amplitude.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|a − b|` against another trajectory on the same grid.
    pub fn max_deviation(&self, other: &AmplitudeTrajectory) -> f64 {
        self.amplitude
            .iter()
            .zip(&other.amplitude)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_contractive(&self) -> bool {
        self.max_abs() <= 1.0 + CONTRACTIVITY_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    History,
    #[default]
    Aux,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::History => "history",
            SolverKind::Aux => "aux",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "history" => Ok(SolverKind::History),
            "aux" => Ok(SolverKind::Aux),
            other => Err(SolverError::UnknownSolver(other.to_string())),
        }
    }
}

fn guard(t: f64, c: Complex64) -> Result<(), SolverError> {
    let magnitude = c.norm();
    if !(magnitude <= BLOW_UP_THRESHOLD) {
        return Err(SolverError::BlowUp { t, magnitude });
    }
    Ok(())
}

/// Kernel values needed by one step of the history scheme.
enum KernelTable<'k, K: MemoryKernel + ?Sized> {
    /// `F(m·h)` for `m = 0..=N+1` and `F((m+½)·h)` for `m = 0..=N`, plus
    /// reversed copies for the history sums.
    Lag {
        full: Vec<Complex64>,
        half: Vec<Complex64>,
        full_rev: Vec<Complex64>,
        half_rev: Vec<Complex64>,
    },
    /// Rows are produced on demand; the `t_{n+1}` row of step `n` is reused
    /// as the `t_n` row of the next step.
    TwoTime { kernel: &'k K },
}

/// Classical 4-stage Runge–Kutta for the integro-differential equation with
/// the memory integral discretized by the composite trapezoid rule over
/// stored full-step history, closed by a trapezoid panel from `t_n` to the
/// stage time using the stage value.
///
/// Lag-only kernels are tabulated once (O(N) storage); general two-time
/// kernels are evaluated row by row (O(N²) evaluations).
pub fn solve_history<K>(kernel: &K, grid: TimeGrid) -> Result<AmplitudeTrajectory, SolverError>
where
    K: MemoryKernel + ?Sized,
{
    let n_steps = grid.n_steps;
    let h = grid.dt_gamma;
    let table = if kernel.is_lag_only() {
        let mut full = Vec::with_capacity(n_steps + 2);
        let mut half = Vec::with_capacity(n_steps + 1);
        for m in 0..=n_steps + 1 {
            full.push(kernel.eval(m as f64 * h, 0.0)?);
        }
        for m in 0..=n_steps {
            half.push(kernel.eval((m as f64 + 0.5) * h, 0.0)?);
        }
        let full_rev = full.iter().rev().copied().collect();
        let half_rev = half.iter().rev().copied().collect();
        KernelTable::Lag {
            full,
            half,
            full_rev,
            half_rev,
        }
    } else {
        KernelTable::TwoTime { kernel }
    };

    let mut amplitude = Vec::with_capacity(grid.len());
    let mut derivative = Vec::with_capacity(grid.len());
    amplitude.push(Complex64::new(1.0, 0.0));
    derivative.push(Complex64::new(0.0, 0.0));

    // Lag path: raw sum Σ_j F((n+1−j)h)·C_j of step n is reused as the
    // t_{n+1} sum of the next step once C_{n+1} is appended.
    let mut raw_now = Complex64::new(0.0, 0.0);

    // Rows for the two-time case: F(t_n, t_j), F(t_n + h/2, t_j), F(t_n + h, t_j).
    let mut row_now: Vec<Complex64> = Vec::new();
    let mut row_half: Vec<Complex64> = Vec::new();
    let mut row_next: Vec<Complex64> = Vec::new();
    if let KernelTable::TwoTime { kernel } = &table {
        row_now.push(kernel.eval(0.0, 0.0)?);
    }

    for n in 0..n_steps {
        let t_n = grid.time(n);
        let c_n = amplitude[n];
        let history = &amplitude[..=n];

        // Memory integral over [0, t_n] evaluated at t_n + c·h, for the
        // trapezoid rule on the stored nodes, plus the kernel values at the
        // two ends of the final partial panel.
        let (hist_now, hist_half, hist_next, f_half_tn, f_next_tn, f_zero_half, f_zero_next);
        match &table {
            KernelTable::Lag {
                full,
                half,
                full_rev,
                half_rev,
            } => {
                if n == 0 {
                    raw_now = full[0] * c_n;
                } else {
                    raw_now += full[0] * c_n;
                }
                // half[n−j] = half_rev[N−n+j], full[n+1−j] = full_rev[N−n+j].
                let offset = n_steps - n;
                let (raw_half, raw_next) = lagged_sums(
                    &half_rev[offset..=n_steps],
                    &full_rev[offset..=n_steps],
                    history,
                );
                let c_0 = history[0];
                hist_now = trapezoid_from_raw(raw_now, full[n], full[0], c_0, c_n, n, h);
                hist_half = trapezoid_from_raw(raw_half, half[n], half[0], c_0, c_n, n, h);
                hist_next = trapezoid_from_raw(raw_next, full[n + 1], full[1], c_0, c_n, n, h);
                raw_now = raw_next;
                f_half_tn = half[0];
                f_next_tn = full[1];
                f_zero_half = full[0];
                f_zero_next = full[0];
            }
            KernelTable::TwoTime { kernel } => {
                let t_half = t_n + 0.5 * h;
                let t_next = t_n + h;
                row_half.clear();
                row_next.clear();
                for j in 0..=n {
                    let tj = grid.time(j);
                    row_half.push(kernel.eval(t_half, tj)?);
                    row_next.push(kernel.eval(t_next, tj)?);
                }
                hist_now = trapezoid_row(&row_now, history, h);
                hist_half = trapezoid_row(&row_half, history, h);
                hist_next = trapezoid_row(&row_next, history, h);
                f_half_tn = row_half[n];
                f_next_tn = row_next[n];
                f_zero_half = kernel.eval(t_half, t_half)?;
                f_zero_next = kernel.eval(t_next, t_next)?;
            }
        }

        let rhs_now = -hist_now;
        let tail = |f_at_tn: Complex64, f_diag: Complex64, width: f64, y: Complex64| {
            0.5 * width * (f_at_tn * c_n + f_diag * y)
        };

        let k1 = rhs_now;
        let y2 = c_n + 0.5 * h * k1;
        let k2 = -(hist_half + tail(f_half_tn, f_zero_half, 0.5 * h, y2));
        let y3 = c_n + 0.5 * h * k2;
        let k3 = -(hist_half + tail(f_half_tn, f_zero_half, 0.5 * h, y3));
        let y4 = c_n + h * k3;
        let k4 = -(hist_next + tail(f_next_tn, f_zero_next, h, y4));
        let c_next = c_n + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        guard(t_n + h, c_next)?;

        if n > 0 {
            derivative.push(rhs_now);
        }
        amplitude.push(c_next);

        if let KernelTable::TwoTime { kernel } = &table {
            row_now.clear();
            row_now.extend_from_slice(&row_next);
            row_now.push(kernel.eval(t_n + h, t_n + h)?);
        }
    }

    // Derivative at the final node from the completed history.
    let last = n_steps;
    let final_rhs = match &table {
        KernelTable::Lag { full, .. } => {
            let raw = raw_now + full[0] * amplitude[last];
            -trapezoid_from_raw(raw, full[last], full[0], amplitude[0], amplitude[last], last, h)
        }
        KernelTable::TwoTime { .. } => -trapezoid_row(&row_now, &amplitude, h),
    };
    derivative.push(final_rhs);

    Ok(AmplitudeTrajectory {
        grid,
        amplitude,
        derivative,
    })
}

/// `(Σ_j a[j]·C_j, Σ_j b[j]·C_j)` in one pass over the history. The kernel
/// slices hold lagged values in reverse order so every operand is walked
/// forward.
fn lagged_sums(a: &[Complex64], b: &[Complex64], history: &[Complex64]) -> (Complex64, Complex64) {
    debug_assert!(a.len() == history.len() && b.len() == history.len());
    // Independent accumulators break the add dependency chain.
    const LANES: usize = 2;
    let mut acc = [[0.0f64; 4]; LANES];
    let chunks = history.len() / LANES * LANES;
    for i in (0..chunks).step_by(LANES) {
        for l in 0..LANES {
            let c = history[i + l];
            let (fa, fb) = (a[i + l], b[i + l]);
            acc[l][0] += fa.re * c.re - fa.im * c.im;
            acc[l][1] += fa.re * c.im + fa.im * c.re;
            acc[l][2] += fb.re * c.re - fb.im * c.im;
            acc[l][3] += fb.re * c.im + fb.im * c.re;
        }
    }
    for i in chunks..history.len() {
        let c = history[i];
        let (fa, fb) = (a[i], b[i]);
        acc[0][0] += fa.re * c.re - fa.im * c.im;
        acc[0][1] += fa.re * c.im + fa.im * c.re;
        acc[0][2] += fb.re * c.re - fb.im * c.im;
        acc[0][3] += fb.re * c.im + fb.im * c.re;
    }
    let total = |k: usize| acc.iter().map(|lane| lane[k]).sum::<f64>();
    (
        Complex64::new(total(0), total(1)),
        Complex64::new(total(2), total(3)),
    )
}

/// Trapezoid weights applied to a raw sum: halves the `j = 0` and `j = n`
/// terms, whose kernel factors are `f_first` and `f_last`.
fn trapezoid_from_raw(
    raw: Complex64,
    f_first: Complex64,
    f_last: Complex64,
    c_0: Complex64,
    c_n: Complex64,
    n: usize,
    h: f64,
) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    (raw - 0.5 * (f_first * c_0 + f_last * c_n)) * h
}

/// `h·Σ'_j row[j]·C_j` with `row[j] = F(t, t_j)`.
fn trapezoid_row(row: &[Complex64], history: &[Complex64], h: f64) -> Complex64 {
    let n = history.len() - 1;
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let sum: Complex64 = row.iter().zip(history).map(|(f, c)| f * c).sum();
    (sum - 0.5 * (row[0] * history[0] + row[n] * history[n])) * h
}

/// Auxiliary-state reduction: with `y_j(t) = ∫₀ᵗ e^{−μ_j(t−t′)} C̃(t′)dt′`,
/// the equation becomes the local system `C̃′ = −Σ w_j y_j`,
/// `y_j′ = C̃ − μ_j y_j`, integrated by classical RK4.
pub fn solve_aux(
    kernel: &ExponentialKernel,
    grid: TimeGrid,
) -> Result<AmplitudeTrajectory, SolverError> {
    let branches = kernel.branches();
    let m = branches.len();
    let h = grid.dt_gamma;

    let rhs = |c: Complex64, y: &[Complex64], dc: &mut Complex64, dy: &mut [Complex64]| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, b) in branches.iter().enumerate() {
            acc += b.weight * y[j];
            dy[j] = c - b.rate * y[j];
        }
        *dc = -acc;
    };

    let zero = Complex64::new(0.0, 0.0);
    let mut c = Complex64::new(1.0, 0.0);
    let mut y = vec![zero; m];
    let (mut k1y, mut k2y, mut k3y, mut k4y) =
        (vec![zero; m], vec![zero; m], vec![zero; m], vec![zero; m]);
    let mut stage = vec![zero; m];
    let (mut k1, mut k2, mut k3, mut k4) = (zero, zero, zero, zero);

    let mut amplitude = Vec::with_capacity(grid.len());
    let mut derivative = Vec::with_capacity(grid.len());
    amplitude.push(c);

    for n in 0..grid.n_steps {
        rhs(c, &y, &mut k1, &mut k1y);
        derivative.push(k1);

        for j in 0..m {
            stage[j] = y[j] + 0.5 * h * k1y[j];
        }
        rhs(c + 0.5 * h * k1, &stage, &mut k2, &mut k2y);
        for j in 0..m {
            stage[j] = y[j] + 0.5 * h * k2y[j];
        }
        rhs(c + 0.5 * h * k2, &stage, &mut k3, &mut k3y);
        for j in 0..m {
            stage[j] = y[j] + h * k3y[j];
        }
        rhs(c + h * k3, &stage, &mut k4, &mut k4y);

        c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        for j in 0..m {
            y[j] += h / 6.0 * (k1y[j] + 2.0 * k2y[j] + 2.0 * k3y[j] + k4y[j]);
        }
        guard(grid.time(n + 1), c)?;
        amplitude.push(c);
    }
    rhs(c, &y, &mut k1, &mut k1y);
    derivative.push(k1);

    Ok(AmplitudeTrajectory {
        grid,
        amplitude,
        derivative,
    })
}

/// Closed-form amplitude for `F = W·e^{−Λ(t−t′)}`:
/// `C̃ = e^{−Λt/2}[cosh(Dt/2) + (Λ/D)·sinh(Dt/2)]`, `D = √(Λ² − 4W)`.
///
/// Written as `cosh x + (Λt/2)·sinh(x)/x` so that `D → 0` needs no special
/// branch beyond a series for `sinh(x)/x`.
pub fn stationary_analytic(weight: Complex64, rate: Complex64, t_gamma: f64) -> Complex64 {
    let d = (rate * rate - 4.0 * weight).sqrt();
    let x = d * (0.5 * t_gamma);
    let envelope = (-rate * (0.5 * t_gamma)).exp();
    envelope * (x.cosh() + rate * (0.5 * t_gamma) * sinhc(x))
}

/// Time derivative of [`stationary_analytic`].
pub fn stationary_analytic_derivative(
    weight: Complex64,
    rate: Complex64,
    t_gamma: f64,
) -> Complex64 {
    // C̃′ = −W·t·e^{−Λt/2}·sinh(x)/x with x = Dt/2.
    let d = (rate * rate - 4.0 * weight).sqrt();
    let x = d * (0.5 * t_gamma);
    -weight * t_gamma * (-rate * (0.5 * t_gamma)).exp() * sinhc(x)
}

fn sinhc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}
