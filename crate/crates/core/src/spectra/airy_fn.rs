//! The Airy function Ai on the real line and its zeros.
//!
//! Ai is summed from its Maclaurin series on [−7, 5] and from the Poincaré
//! asymptotic expansions outside. On the oscillatory side both branches are
//! accurate to about 2e-11 absolute at the switch point, which keeps located
//! zeros well inside the 1e-10 bisection tolerance. On the decaying side the
//! series loses relative accuracy to cancellation, so the switch is earlier.

use std::f64::consts::{FRAC_PI_4, PI};

/// Ai(0) = 3^{-2/3} / Γ(2/3)
const AI0: f64 = 0.355_028_053_887_817_24;
/// -Ai'(0) = 3^{-1/3} / Γ(1/3)
const DAI0: f64 = 0.258_819_403_792_806_8;

const SERIES_LIMIT_NEG: f64 = 7.0;
const SERIES_LIMIT_POS: f64 = 5.0;

/// Zero-location tolerance.
pub(crate) const ZERO_TOL: f64 = 1e-10;

fn series(x: f64) -> f64 {
    let x3 = x * x * x;
    let mut f_term = 1.0;
    let mut g_term = x;
    let mut f = f_term;
    let mut g = g_term;
    for k in 0..200 {
        let k3 = 3.0 * k as f64;
        f_term *= x3 / ((k3 + 2.0) * (k3 + 3.0));
        g_term *= x3 / ((k3 + 3.0) * (k3 + 4.0));
        f += f_term;
        g += g_term;
        if f_term.abs() < 1e-17 * f.abs().max(1e-300) && g_term.abs() < 1e-17 * g.abs().max(1e-300) {
            break;
        }
    }
    AI0 * f - DAI0 * g
}

/// Coefficients u_k of the Airy asymptotic expansions.
fn u_coefficients(count: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(count);
    u.push(1.0);
    for k in 1..count {
        let kf = k as f64;
        let num = (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0);
        let den = (2.0 * kf - 1.0) * 216.0 * kf;
        u.push(u[k - 1] * num / den);
    }
    u
}

/// Sums a divergent asymptotic series `sum c_k t^k`, stopping at the
/// smallest term.
fn truncated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for t in terms {
        if t.abs() > last {
            break;
        }
        sum += t;
        last = t.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn asymptotic_negative(z: f64) -> f64 {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let u = u_coefficients(40);
    // Even part: sum (-1)^k u_{2k} zeta^{-2k}; odd part: sum (-1)^k u_{2k+1} zeta^{-2k-1}
    let even = truncated_sum((0..20).map(|k| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * u[2 * k] * zeta.powi(-(2 * k as i32))
    }));
    let odd = truncated_sum((0..19).map(|k| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * u[2 * k + 1] * zeta.powi(-(2 * k as i32 + 1))
    }));
    let phase = zeta - FRAC_PI_4;
    (phase.cos() * even + phase.sin() * odd) / (PI.sqrt() * z.powf(0.25))
}

fn asymptotic_positive(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let u = u_coefficients(40);
    let sum = truncated_sum((0..40).map(|k| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * u[k] * zeta.powi(-(k as i32))
    }));
    (-zeta).exp() * sum / (2.0 * PI.sqrt() * x.powf(0.25))
}

/// The Airy function of the first kind.
pub fn airy_ai(x: f64) -> f64 {
    if x.is_nan() {
        f64::NAN
    } else if x > SERIES_LIMIT_POS {
        asymptotic_positive(x)
    } else if x < -SERIES_LIMIT_NEG {
        asymptotic_negative(-x)
    } else {
        series(x)
    }
}

/// Leading terms of the asymptotic expansion of the i-th zero magnitude.
pub(crate) fn zero_guess(i: usize) -> f64 {
    let t = 3.0 * PI * (4.0 * i as f64 - 1.0) / 8.0;
    let t2 = t * t;
    t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 / t2 - 5.0 / 36.0 / (t2 * t2))
}

/// Magnitude |z_i| of the i-th zero of Ai (i ≥ 1), located by bracketing
/// around the asymptotic guess and bisecting to [`ZERO_TOL`].
pub(crate) fn zero_magnitude(i: usize) -> f64 {
    let guess = zero_guess(i);
    let half = 0.25 * PI / guess.sqrt();
    let (mut lo, mut hi) = (guess - half, guess + half);
    let mut flo = airy_ai(-lo);
    let fhi = airy_ai(-hi);
    // The guess is accurate to far better than a quarter spacing for every
    // index, so the bracket always holds a single sign change.
    debug_assert!(flo * fhi < 0.0, "bracket failure at zero {i}");
    while hi - lo > ZERO_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = airy_ai(-mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
