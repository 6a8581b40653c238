//! Direct frequency-domain evaluation of the memory kernel.
//!
//! The integrand `J(ω)·sin[ω(βt−τ)]·sin[ω(βt′−τ)]·e^{−i(ω−ω₀)(t−t′)}` is
//! split by the product-to-sum identity into four branches
//! `c_b·J(ω)·e^{−iωk_b}`, each integrated over `x = ω − ω₁`:
//!
//! * inside the window `|x| ≤ Wλ` by globally adaptive 21-point
//!   Gauss–Kronrod, with an initial panel count proportional to the
//!   branch phase rate `|k_b|`;
//! * outside the window through the exact Lorentzian Fourier tail
//!   (complex exponential integrals), honoring the `ω ≥ 0` cut-off.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::expint::scaled_exp1;
use super::{check_inside, KernelError, MemoryKernel};
use crate::model::{CavityGeometry, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Half-width of the numerically integrated window, in units of `λ`.
    pub window_halfwidth_lambdas: f64,
    /// Target error relative to `∫J dω = γλ/2`.
    pub rel_tol: f64,
    /// Keep the `cos[ω(β(t+t′) − 2τ)]` branch.
    pub include_boundary_term: bool,
    /// Honor the `ω ≥ 0` lower limit.
    pub truncate_at_zero: bool,
    /// Maximum number of Gauss–Kronrod panels per branch.
    pub panel_budget: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            window_halfwidth_lambdas: 50.0,
            rel_tol: 1e-6,
            include_boundary_term: true,
            truncate_at_zero: true,
            panel_budget: 200_000,
        }
    }
}

impl QuadratureConfig {
    pub fn without_boundary_term(mut self) -> Self {
        self.include_boundary_term = false;
        self
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.window_halfwidth_lambdas > 0.0) {
            return Err(KernelError::InvalidConfig(format!(
                "window must be positive, got {}",
                self.window_halfwidth_lambdas
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(KernelError::InvalidConfig(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.panel_budget == 0 {
            return Err(KernelError::InvalidConfig("panel budget is zero".into()));
        }
        Ok(())
    }
}

/// 21-point Kronrod extension of the 10-point Gauss rule.
pub struct GaussKronrod21;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_606_123_782,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

impl GaussKronrod21 {
    /// Kronrod estimate and `|Kronrod − Gauss|` on `[a, b]`.
    pub fn apply<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
    where
        F: Fn(f64) -> Complex64,
    {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = f(center);
        let mut kronrod = fc * WGK[10];
        let mut gauss = Complex64::new(0.0, 0.0);
        for j in 0..10 {
            let dx = half * XGK[j];
            let pair = f(center - dx) + f(center + dx);
            kronrod += pair * WGK[j];
            if j % 2 == 1 {
                gauss += pair * WG[j / 2];
            }
        }
        let kronrod = kronrod * half;
        let gauss = gauss * half;
        (kronrod, (kronrod - gauss).norm())
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration over pre-split panels: the panel with the
/// largest error estimate is bisected until the summed estimate meets
/// `abs_tol`. Final values are summed in breakpoint order.
fn integrate_adaptive<F>(
    f: &F,
    breakpoints: &[f64],
    abs_tol: f64,
    budget: usize,
) -> Result<Complex64, KernelError>
where
    F: Fn(f64) -> Complex64,
{
    let mut heap: BinaryHeap<Panel> = breakpoints
        .windows(2)
        .map(|w| {
            let (value, error) = GaussKronrod21::apply(f, w[0], w[1]);
            Panel {
                a: w[0],
                b: w[1],
                value,
                error,
            }
        })
        .collect();
    let mut total_error: f64 = heap.iter().map(|p| p.error).sum();
    while total_error > abs_tol {
        if heap.len() >= budget {
            return Err(KernelError::NonConvergence {
                budget,
                error: total_error,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel can no longer be split in floating point.
            return Err(KernelError::NonConvergence {
                budget,
                error: total_error,
            });
        }
        let (lv, le) = GaussKronrod21::apply(f, worst.a, mid);
        let (rv, re) = GaussKronrod21::apply(f, mid, worst.b);
        let cancels = worst.error > 1e-3 * total_error;
        total_error += le + re - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        // The running sum cannot resolve small panels after a dominant one
        // is removed.
        if cancels || total_error < 0.0 {
            total_error = heap.iter().map(|p| p.error).sum();
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(panels.iter().map(|p| p.value).sum())
}

/// `∫_a^∞ e^{−ikx} / (x² + λ²) dx` for `a ≥ 0`.
pub fn lorentzian_fourier_tail(k: f64, a: f64, lambda: f64) -> Complex64 {
    if k == 0.0 {
        return Complex64::new((0.5 * PI - (a / lambda).atan()) / lambda, 0.0);
    }
    if k < 0.0 {
        return lorentzian_fourier_tail(-k, a, lambda).conj();
    }
    // 1/(x²+λ²) = [1/(x−iλ) − 1/(x+iλ)]/(2iλ) and
    // ∫_a^∞ e^{−ikx}/(x−c) dx = e^{−ika}·e^{z}E₁(z), z = ik(a−c).
    let z_plus = Complex64::new(k * lambda, k * a);
    let z_minus = Complex64::new(-k * lambda, k * a);
    let phase = Complex64::from_polar(1.0, -k * a);
    phase * (scaled_exp1(z_plus) - scaled_exp1(z_minus)) / Complex64::new(0.0, 2.0 * lambda)
}

/// `∫ e^{−ikx}/(x²+λ²) dx` over the integration domain, `x = ω − ω₁`.
fn branch_integral(
    k: f64,
    lambda: f64,
    omega1: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64, KernelError> {
    let half_width = cfg.window_halfwidth_lambdas * lambda;
    let cut = if cfg.truncate_at_zero {
        Some(-omega1)
    } else {
        None
    };
    let x_hi = half_width;
    let x_lo = match cut {
        Some(c) if c > -half_width => c,
        _ => -half_width,
    };
    if x_lo >= x_hi {
        return Ok(Complex64::new(0.0, 0.0));
    }

    // One panel per oscillation on each side of the Lorentzian peak.
    let oscillations = |len: f64| ((len * k.abs() / (2.0 * PI)).ceil() as usize).max(2);
    let mut breakpoints = Vec::new();
    let mut push_range = |from: f64, to: f64| {
        let n = oscillations(to - from);
        for i in 0..n {
            breakpoints.push(from + (to - from) * i as f64 / n as f64);
        }
    };
    if x_lo < 0.0 && x_hi > 0.0 {
        push_range(x_lo, 0.0);
        push_range(0.0, x_hi);
    } else {
        push_range(x_lo, x_hi);
    }
    breakpoints.push(x_hi);

    let lambda2 = lambda * lambda;
    let integrand = |x: f64| Complex64::from_polar(1.0 / (x * x + lambda2), -k * x);
    let abs_tol = 0.5 * cfg.rel_tol * PI / lambda;
    let window = integrate_adaptive(&integrand, &breakpoints, abs_tol, cfg.panel_budget)?;

    let upper = lorentzian_fourier_tail(k, x_hi, lambda);
    let lower = if x_lo > -half_width {
        Complex64::new(0.0, 0.0)
    } else {
        let to_minus_infinity = lorentzian_fourier_tail(-k, -x_lo, lambda);
        match cut {
            Some(c) => to_minus_infinity - lorentzian_fourier_tail(-k, -c, lambda),
            None => to_minus_infinity,
        }
    };
    Ok(window + upper + lower)
}

/// Adaptive-quadrature evaluation of `F(t, t′)`.
///
/// Both times must keep the qubit inside the cavity when the boundary
/// branch is kept; with it dropped the kernel depends on `t − t′` only and
/// positions are not checked.
pub fn quadrature_kernel(
    t_gamma: f64,
    tprime_gamma: f64,
    params: &SystemParams,
    geom: &CavityGeometry,
    cfg: &QuadratureConfig,
) -> Result<Complex64, KernelError> {
    cfg.validate()?;
    let beta = params.beta();
    let lambda = params.lambda_over_gamma;
    let omega1 = params.omega1();
    let delta = params.delta_over_gamma;
    let s = t_gamma - tprime_gamma;

    // sin(ωa)·sin(ωb) = ¼Σ± e^{±iωd} − ¼Σ± e^{±iωσ}, d = a − b, σ = a + b.
    let d = beta * s;
    let mut branches: Vec<(f64, f64)> = vec![(0.25, d), (0.25, -d)];
    if cfg.include_boundary_term {
        let a = check_inside(t_gamma, params, geom)? - geom.tau_gamma;
        let b = check_inside(tprime_gamma, params, geom)? - geom.tau_gamma;
        let sigma = a + b;
        branches.push((-0.25, sigma));
        branches.push((-0.25, -sigma));
    }

    // Branch b contributes c·e^{i(Δs + ω₁e)}·∫ J(x) e^{−ix(s−e)} dx.
    let mut total = Complex64::new(0.0, 0.0);
    for (coefficient, shift) in branches {
        let k = s - shift;
        let integral = branch_integral(k, lambda, omega1, cfg)?;
        let phase = Complex64::from_polar(1.0, delta * s + omega1 * shift);
        total += phase * integral * coefficient;
    }
    Ok(total * (lambda * lambda / (2.0 * PI)))
}

/// [`quadrature_kernel`] bound to one parameter set.
#[derive(Debug, Clone)]
pub struct QuadratureKernel {
    pub params: SystemParams,
    pub geometry: CavityGeometry,
    pub config: QuadratureConfig,
}

impl QuadratureKernel {
    pub fn new(
        params: SystemParams,
        geometry: CavityGeometry,
        config: QuadratureConfig,
    ) -> Result<Self, KernelError> {
        config.validate()?;
        Ok(Self {
            params,
            geometry,
            config,
        })
    }
}

impl MemoryKernel for QuadratureKernel {
    fn eval(&self, t: f64, t_prime: f64) -> Result<Complex64, KernelError> {
        quadrature_kernel(t, t_prime, &self.params, &self.geometry, &self.config)
    }

    fn is_lag_only(&self) -> bool {
        !self.config.include_boundary_term
    }
}
