//! Deterministic spectral data: Airy-operator eigenvalues and their counting
//! function, semicircle classical locations, the effective potential ξ, and
//! the noiseless Riccati flow.

mod airy_fn;
mod ode;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use airy_fn::airy_ai;
pub use ode::{riccati_ode_blowup, riccati_ode_blowups, RiccatiDrift};

/// How eigenvalues γ_i of the Airy operator -d²/dx² + x are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AirySpectrumMode {
    /// γ_i = (3π(i − 1/4)/2)^{2/3}.
    #[default]
    Asymptotic,
    /// γ_i = −z_i with z_i the i-th zero of Ai.
    Exact,
}

/// i-th eigenvalue (i ≥ 1) of the Airy operator.
pub fn airy_eigenvalue(i: usize, mode: AirySpectrumMode) -> Result<f64> {
    if i == 0 {
        return Err(Error::domain("Airy eigenvalue index must be at least 1"));
    }
    Ok(match mode {
        AirySpectrumMode::Asymptotic => (1.5 * PI * (i as f64 - 0.25)).powf(2.0 / 3.0),
        AirySpectrumMode::Exact => airy_fn::zero_magnitude(i),
    })
}

fn gamma(i: usize, mode: AirySpectrumMode) -> f64 {
    airy_eigenvalue(i, mode).expect("index is positive")
}

/// N₀(λ) = #{i : γ_i ≤ λ}.
///
/// The asymptotic formula is inverted for a starting guess which is then
/// corrected by comparing against the neighbouring eigenvalues.
pub fn airy_count(lambda: f64, mode: AirySpectrumMode) -> usize {
    if !(lambda > 0.0) {
        return 0;
    }
    let guess = 2.0 / (3.0 * PI) * lambda.powf(1.5) + 0.25;
    let mut count = if guess.is_finite() { guess.floor().max(0.0) as usize } else { usize::MAX / 2 };
    while gamma(count + 1, mode) <= lambda {
        count += 1;
    }
    while count >= 1 && gamma(count, mode) > lambda {
        count -= 1;
    }
    count
}

/// Semicircle mass on [−2, x].
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        (x * (4.0 - x * x).sqrt() / 4.0 + (x / 2.0).asin()) / PI + 0.5
    }
}

/// Classical location γ_j^{(n)}: the point whose semicircle mass to the
/// right equals j/n.
pub fn classical_location(j: usize, n: usize) -> Result<f64> {
    if j == 0 || j > n {
        return Err(Error::domain(format!(
            "classical location index {j} outside [1, {n}]"
        )));
    }
    if j == n {
        return Ok(-2.0);
    }
    let target = j as f64 / n as f64;
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    // upper mass 1 - F(x) is decreasing in x
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - semicircle_cdf(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Effective potential ξ: zero on [−2, 2], even, with ξ'(x) = √(x²−4)/2
/// for x > 2.
pub fn xi(x: f64) -> f64 {
    let x = x.abs();
    if x <= 2.0 {
        return 0.0;
    }
    let r = (x * x - 4.0).sqrt();
    x / 4.0 * r - ((x + r) / 2.0).ln()
}

/// Rescaled potential ξ̃(x) = (n/k) ξ(2 − (k/n)^{2/3} x).
pub fn xi_tilde(x: f64, n: usize, k: usize) -> f64 {
    let ratio = k as f64 / n as f64;
    xi(2.0 - ratio.powf(2.0 / 3.0) * x) / ratio
}
