//! Rate functionals and logarithmic energies of signed measures.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Density, SignedMeasure};
use crate::quad;
use crate::spectra::xi_tilde;
use crate::stats::kahan_sum;

const QUAD_TOL: f64 = 1e-11;
/// Grid points used for the supremum defining I₂.
pub const PSI_GRID: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub r0: f64,
    pub r1: f64,
    /// Constant of the upper-tail estimate entering ψ; not fixed by theory,
    /// defaults to 1.
    pub c: f64,
}

impl RateParams {
    pub fn new(r0: f64, r1: f64) -> Self {
        RateParams { r0, r1, c: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 >= 1.0 && self.r0.is_finite()) {
            return Err(Error::domain(format!("R0 must be finite and at least 1, got {}", self.r0)));
        }
        if !(self.r1 >= 1.0 && self.r1.is_finite()) {
            return Err(Error::domain(format!("R1 must be finite and at least 1, got {}", self.r1)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::domain(format!("c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// How coincident points are treated by [`interaction`].
#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel {
    /// −log max(|x − y|, ε), diagonal included.
    Truncated(f64),
    /// −log|x − y| with the diagonal x = y removed; coincident atoms are an
    /// error.
    OffDiagonal,
    /// −log|x − y| on the whole plane; any atom makes the energy +∞.
    Full,
}

impl Kernel {
    fn eval(self, d: f64) -> f64 {
        match self {
            Kernel::Truncated(eps) => -(d.abs().max(eps)).ln(),
            _ => -d.abs().ln(),
        }
    }
}

/// ∫ K(x − y) dρ(y) for the density part of `rho`.
fn density_potential(rho: &SignedMeasure, x: f64, kernel: Kernel) -> f64 {
    let (lo, hi) = rho.window;
    let mut breaks = rho.density_breaks();
    match kernel {
        Kernel::Truncated(eps) => {
            let a = (x - eps).max(lo);
            let b = (x + eps).min(hi);
            let band = if b > a { -eps.ln() * rho.density_mass(a, b) } else { 0.0 };
            breaks.push(x - eps);
            breaks.push(x + eps);
            let outside = |y: f64| {
                if (y - x).abs() < eps {
                    0.0
                } else {
                    kernel.eval(x - y) * rho.pdf(y)
                }
            };
            band + quad::integrate(outside, lo, hi, &breaks, QUAD_TOL)
        }
        _ => {
            breaks.push(x);
            quad::integrate(|y| kernel.eval(x - y) * rho.pdf(y), lo, hi, &breaks, QUAD_TOL)
        }
    }
}

/// ∬ K(x − y) dμ(x) dν(y).
///
/// With `same` set, μ and ν are one measure and the self-pairs of atoms form
/// the diagonal.
fn interaction(mu: &SignedMeasure, nu: &SignedMeasure, kernel: Kernel, same: bool) -> Result<f64> {
    let mut atom_atom = Vec::with_capacity(mu.atoms.len() * nu.atoms.len());
    for (i, &(x, w)) in mu.atoms.iter().enumerate() {
        for (j, &(y, v)) in nu.atoms.iter().enumerate() {
            if x == y {
                match kernel {
                    Kernel::Truncated(_) => {}
                    Kernel::Full => return Ok(f64::INFINITY),
                    Kernel::OffDiagonal if same && i == j => continue,
                    Kernel::OffDiagonal => {
                        return Err(Error::domain(format!("coincident atoms at {x}: the log-energy is infinite")))
                    }
                }
            }
            atom_atom.push(w * v * kernel.eval(x - y));
        }
    }
    let mut terms = vec![kahan_sum(atom_atom)];
    // a single atom against a density is finite under every kernel
    for &(x, w) in &mu.atoms {
        terms.push(w * density_potential(nu, x, kernel));
    }
    for &(y, v) in &nu.atoms {
        terms.push(v * density_potential(mu, y, kernel));
    }
    if mu.density != Density::None && nu.density != Density::None {
        let (lo, hi) = mu.window;
        let outer = quad::integrate(
            |x| {
                let p = mu.pdf(x);
                if p == 0.0 {
                    0.0
                } else {
                    p * density_potential(nu, x, kernel)
                }
            },
            lo,
            hi,
            &mu.density_breaks(),
            1e-10,
        );
        terms.push(outer);
    }
    Ok(kahan_sum(terms))
}

/// ∫_{x<0} f(x) dμ(x) over the whole window.
fn negative_axis_integral(mu: &SignedMeasure, f: impl Fn(f64) -> f64) -> f64 {
    let atoms = kahan_sum(mu.atoms.iter().filter(|a| a.0 < 0.0).map(|&(x, w)| w * f(x)));
    let (lo, hi) = mu.window;
    let hi = hi.min(0.0);
    if hi <= lo {
        return atoms;
    }
    atoms + quad::integrate(|x| f(x) * mu.pdf(x), lo, hi, &mu.density_breaks(), QUAD_TOL)
}

/// (4/3)∫_{x<0} |x|^{3/2} dμ(x).
pub fn potential_term(mu: &SignedMeasure) -> f64 {
    negative_axis_integral(mu, |x| 4.0 / 3.0 * (-x).powf(1.5))
}

/// Interaction part of [`rate_i`]:
/// −∬_{[−R0,R0]²} log max(|x − y|, R1^{−3}) dμ dμ.
pub fn rate_interaction(mu: &SignedMeasure, params: &RateParams) -> Result<f64> {
    params.validate()?;
    let (lo, hi) = mu.window;
    if lo > -params.r0 || hi < params.r0 {
        return Err(Error::domain(format!(
            "measure window [{lo}, {hi}] does not cover [-R0, R0] = [{}, {}]",
            -params.r0, params.r0
        )));
    }
    let inner = mu.restrict(-params.r0, params.r0);
    interaction(&inner, &inner, Kernel::Truncated(params.r1.powi(-3)), true)
}

/// Truncated rate functional: the interaction part plus
/// (4/3)∫_{x<0}|x|^{3/2} dμ.
pub fn rate_i(mu: &SignedMeasure, params: &RateParams) -> Result<f64> {
    Ok(rate_interaction(mu, params)? + potential_term(mu))
}

/// Untruncated functional of a candidate extension: an upper bound for the
/// infimum over extensions. Infinite as soon as the extension has atoms.
pub fn i1_upper(extension: &SignedMeasure) -> Result<f64> {
    let e = interaction(extension, extension, Kernel::Full, true)?;
    if e.is_infinite() {
        return Ok(e);
    }
    Ok(e + potential_term(extension))
}

/// Logarithmic energy −∬_{x≠y} log|x − y| dμ dμ.
pub fn log_energy_j(mu: &SignedMeasure) -> Result<f64> {
    interaction(mu, mu, Kernel::OffDiagonal, true)
}

/// Mixed energy −∬_{x≠y} log|x − y| dμ₁ dμ₂.
pub fn cross_j(mu1: &SignedMeasure, mu2: &SignedMeasure) -> Result<f64> {
    interaction(mu1, mu2, Kernel::OffDiagonal, false)
}

/// J(μ) + 2∫_{x<0} ξ̃(x) dμ(x) with the potential rescaled for (n, k).
pub fn log_energy_j0(mu: &SignedMeasure, n: usize, k: usize) -> Result<f64> {
    if k == 0 || n < k {
        return Err(Error::domain(format!("need n ≥ k ≥ 1, got n={n}, k={k}")));
    }
    Ok(log_energy_j(mu)? + 2.0 * negative_axis_integral(mu, |x| xi_tilde(x, n, k)))
}

/// ψ as a function of x and φ = μ([−R0, x]).
pub fn psi_value(x: f64, phi: f64, params: &RateParams) -> f64 {
    let a = phi.abs();
    if x < 0.0 {
        return 2.0 / 3.0 * (-x).powf(1.5) * a;
    }
    if a == 0.0 {
        return 0.0;
    }
    let first = 2.0 / 3.0 * params.r0.powf(1.5) * a;
    let ratio = x.powf(1.5) / a;
    let second = params.c / 8.0 * (phi * phi).min(x.powi(3) / 6.0) / ratio.max(2.0).ln();
    first.min(second)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiTrace {
    /// (x, ψ(x)) in increasing x.
    pub points: Vec<(f64, f64)>,
    pub i2: f64,
    pub argmax: f64,
}

impl PsiTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,psi\n");
        for (x, p) in &self.points {
            out.push_str(&format!("{x},{p}\n"));
        }
        out
    }
}

/// ψ on a grid of [−R0, R0] plus the atom positions, and its supremum I₂.
pub fn psi_and_i2(mu: &SignedMeasure, params: &RateParams) -> Result<PsiTrace> {
    params.validate()?;
    let r0 = params.r0;
    let (lo, hi) = mu.window;
    if lo > -r0 || hi < r0 {
        return Err(Error::domain(format!("measure window [{lo}, {hi}] does not cover [-R0, R0]")));
    }
    let mut xs: Vec<f64> = (0..PSI_GRID)
        .map(|i| -r0 + 2.0 * r0 * i as f64 / (PSI_GRID - 1) as f64)
        .chain(mu.atoms.iter().map(|a| a.0).filter(|x| (-r0..=r0).contains(x)))
        .collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let points: Vec<(f64, f64)> = xs
        .into_par_iter()
        .map(|x| (x, psi_value(x, mu.mass(-r0, x).unwrap_or(0.0), params)))
        .collect();
    let (argmax, i2) = points
        .iter()
        .copied()
        .fold((f64::NAN, 0.0), |best, p| if p.1 > best.1 { p } else { best });
    Ok(PsiTrace {
        argmax: if argmax.is_nan() { 0.0 } else { argmax },
        points,
        i2,
    })
}

/// Lower-tail rate (4/(15π⁶))(1 − π²z)^{5/2} − 4/(15π⁶) + (2/(3π⁴))z − z²/(2π²)
/// for z ≤ 0.
pub fn phi_minus(z: f64) -> Result<f64> {
    if !(z <= 0.0) {
        return Err(Error::domain(format!("the lower-tail rate needs z ≤ 0, got {z}")));
    }
    Ok(phi_minus_unchecked(z))
}

fn phi_minus_unchecked(z: f64) -> f64 {
    let pi2 = PI * PI;
    let u = pi2 * z;
    let lead = 4.0 / (15.0 * pi2 * pi2 * pi2);
    if u.abs() < 0.1 {
        // binomial series of (1 − u)^{5/2} from the cubic term on; the lower
        // terms cancel exactly
        let mut coef = 1.0;
        let mut power = 1.0;
        let mut sum = 0.0;
        for j in 1..40 {
            coef *= (2.5 - (j - 1) as f64) / j as f64;
            power *= -u;
            if j >= 3 {
                sum += coef * power;
            }
        }
        return lead * sum;
    }
    lead * (1.0 - u).powf(2.5) - lead + 2.0 / (3.0 * pi2 * pi2) * z - z * z / (2.0 * pi2)
}
