//! Exponential integral `E₁(z)` for complex arguments off the negative real
//! axis. Power series near the origin, modified Lentz continued fraction
//! elsewhere.

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_RADIUS: f64 = 2.0;
const MAX_TERMS: usize = 20_000;
const TINY: f64 = 1e-300;

/// `E₁(z) = ∫_z^∞ e^{−t}/t dt` (principal branch).
pub fn exp1(z: Complex64) -> Complex64 {
    if z.norm() <= SERIES_RADIUS {
        exp1_series(z)
    } else {
        exp1_continued_fraction_scaled(z) * (-z).exp()
    }
}

/// `e^{z}·E₁(z)`, which stays O(1/|z|) for large arguments.
pub fn scaled_exp1(z: Complex64) -> Complex64 {
    if z.norm() <= SERIES_RADIUS {
        exp1_series(z) * z.exp()
    } else {
        exp1_continued_fraction_scaled(z)
    }
}

fn exp1_series(z: Complex64) -> Complex64 {
    // E₁(z) = −γ − ln z − Σ_{k≥1} (−z)^k / (k·k!)
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= -z / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

fn exp1_continued_fraction_scaled(z: Complex64) -> Complex64 {
    // e^z E₁(z) = 1/(z+1− 1²/(z+3− 2²/(z+5− …)))
    let one = Complex64::new(1.0, 0.0);
    let mut b = z + one;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = one / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = one / (d * an + b);
        c = b + an / c;
        if c.norm() < TINY {
            c = Complex64::new(TINY, 0.0);
        }
        let delta = c * d;
        h *= delta;
        if (delta - one).norm() < 1e-16 {
            break;
        }
    }
    h
}
