//! Signed measures on the line made of finitely many atoms plus one
//! closed-form density, restricted to a window, and the bounded-Lipschitz
//! distance between them.

mod simplex;

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::spectra::{airy_count, AirySpectrumMode};
use crate::stats::kahan_sum;

use simplex::BoundedLp;

/// Default number of grid intervals for [`bl_distance`].
pub const DEFAULT_GRID: usize = 1024;
/// Smallest accepted number of grid intervals.
pub const MIN_GRID: usize = 64;

/// Absolutely continuous part of a [`SignedMeasure`]. `sign` is ±1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Density {
    None,
    /// sign·(1/π)√x on x ≥ 0.
    AiryReference { sign: f64 },
    /// sign·(1/π)√x·√(1 − (k/n)^{2/3}x/4) on [0, 4(n/k)^{2/3}], of total
    /// mass n/k.
    SemicircleRescaled { n: usize, k: usize, sign: f64 },
    /// Constant `value` on [lo, hi].
    Uniform { lo: f64, hi: f64, value: f64 },
}

impl Density {
    fn validate(&self) -> Result<()> {
        match *self {
            Density::None => Ok(()),
            Density::AiryReference { sign } => check_sign(sign),
            Density::SemicircleRescaled { n, k, sign } => {
                if k == 0 || n < k {
                    return Err(Error::domain(format!("semicircle density needs n ≥ k ≥ 1, got n={n}, k={k}")));
                }
                check_sign(sign)
            }
            Density::Uniform { lo, hi, value } => {
                if !(lo < hi) || !value.is_finite() {
                    return Err(Error::domain("uniform density needs lo < hi and a finite value"));
                }
                Ok(())
            }
        }
    }

    fn is_negative_reference(&self) -> bool {
        match *self {
            Density::AiryReference { sign } | Density::SemicircleRescaled { sign, .. } => sign < 0.0,
            _ => false,
        }
    }

    /// Closed support, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Density::None => None,
            Density::AiryReference { .. } => Some((0.0, f64::INFINITY)),
            Density::SemicircleRescaled { n, k, .. } => Some((0.0, 4.0 / semicircle_c(n, k))),
            Density::Uniform { lo, hi, .. } => Some((lo, hi)),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Density::None => 0.0,
            Density::AiryReference { sign } => {
                if x >= 0.0 {
                    sign * x.sqrt() / PI
                } else {
                    0.0
                }
            }
            Density::SemicircleRescaled { n, k, sign } => {
                let c = semicircle_c(n, k);
                if x >= 0.0 && c * x <= 4.0 {
                    sign * x.sqrt() * (1.0 - 0.25 * c * x).sqrt() / PI
                } else {
                    0.0
                }
            }
            Density::Uniform { lo, hi, value } => {
                if x >= lo && x <= hi {
                    value
                } else {
                    0.0
                }
            }
        }
    }

    /// Signed mass of (−∞, x].
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Density::None => 0.0,
            Density::AiryReference { sign } => {
                if x <= 0.0 {
                    0.0
                } else {
                    sign * 2.0 / (3.0 * PI) * x.powf(1.5)
                }
            }
            Density::SemicircleRescaled { n, k, sign } => {
                let c = semicircle_c(n, k);
                let u = (0.25 * c * x).clamp(0.0, 1.0);
                // ∫_0^u √(v − v²) dv
                let g = if u < 1e-4 {
                    // series avoids cancellation near the lower edge
                    u.powf(1.5) * (2.0 / 3.0 - u / 5.0 - u * u / 28.0)
                } else {
                    (2.0 * u - 1.0) / 4.0 * (u - u * u).max(0.0).sqrt()
                        + ((2.0 * u - 1.0).asin() + PI / 2.0) / 8.0
                };
                sign * 8.0 / (PI * c.powf(1.5)) * g
            }
            Density::Uniform { lo, hi, value } => value * (x.min(hi) - lo).max(0.0),
        }
    }

    /// Signed mass of [a, b].
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.cdf(b) - self.cdf(a)
    }
}

fn check_sign(sign: f64) -> Result<()> {
    if sign == 1.0 || sign == -1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("density sign must be ±1, got {sign}")))
    }
}

/// (k/n)^{2/3}.
fn semicircle_c(n: usize, k: usize) -> f64 {
    (k as f64 / n as f64).powf(2.0 / 3.0)
}

/// Finite signed measure: atoms plus a density, both restricted to `window`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedMeasure {
    /// (position, weight), sorted by position.
    pub atoms: Vec<(f64, f64)>,
    pub density: Density,
    pub window: (f64, f64),
}

impl SignedMeasure {
    pub fn new(mut atoms: Vec<(f64, f64)>, density: Density, window: (f64, f64)) -> Result<Self> {
        let (lo, hi) = window;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain(format!("invalid window [{lo}, {hi}]")));
        }
        density.validate()?;
        for &(x, w) in &atoms {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::domain("atom positions and weights must be finite"));
            }
            if x < lo || x > hi {
                return Err(Error::domain(format!("atom at {x} lies outside the window [{lo}, {hi}]")));
            }
        }
        if density.is_negative_reference() && atoms.iter().any(|&(_, w)| w <= 0.0) {
            return Err(Error::domain("atoms must have positive weight against a negated reference density"));
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(SignedMeasure { atoms, density, window })
    }

    pub fn zero(window: (f64, f64)) -> Self {
        SignedMeasure {
            atoms: Vec::new(),
            density: Density::None,
            window,
        }
    }

    pub fn atomic(atoms: Vec<(f64, f64)>, window: (f64, f64)) -> Result<Self> {
        SignedMeasure::new(atoms, Density::None, window)
    }

    /// Density value inside the window, zero outside.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.window.0 || x > self.window.1 {
            0.0
        } else {
            self.density.pdf(x)
        }
    }

    /// Density mass of [a, b] ∩ window.
    pub fn density_mass(&self, a: f64, b: f64) -> f64 {
        self.density.mass_between(a.max(self.window.0), b.min(self.window.1))
    }

    /// μ([a, b]); the interval must lie inside the window.
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        let (lo, hi) = self.window;
        if a < lo || b > hi {
            return Err(Error::domain(format!("[{a}, {b}] is not inside the window [{lo}, {hi}]")));
        }
        Ok(self.mass_unchecked(a, b))
    }

    fn mass_unchecked(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return 0.0;
        }
        let start = self.atoms.partition_point(|&(x, _)| x < a);
        let atoms = kahan_sum(self.atoms[start..].iter().take_while(|&&(x, _)| x <= b).map(|&(_, w)| w));
        atoms + self.density_mass(a, b)
    }

    /// Total variation |μ|.
    pub fn total_variation(&self) -> f64 {
        kahan_sum(self.atoms.iter().map(|&(_, w)| w.abs())) + self.density_mass(self.window.0, self.window.1).abs()
    }

    /// Same measure restricted to `[lo, hi]` ∩ window.
    pub fn restrict(&self, lo: f64, hi: f64) -> SignedMeasure {
        let window = (lo.max(self.window.0), hi.min(self.window.1));
        SignedMeasure {
            atoms: self
                .atoms
                .iter()
                .copied()
                .filter(|&(x, _)| x >= window.0 && x <= window.1)
                .collect(),
            density: self.density,
            window,
        }
    }

    /// Interior points where the density is not smooth.
    pub fn density_breaks(&self) -> Vec<f64> {
        match self.density.support() {
            None => Vec::new(),
            Some((a, b)) => [a, b]
                .into_iter()
                .filter(|&x| x > self.window.0 && x < self.window.1)
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SignedMeasure = serde_json::from_str(text)?;
        SignedMeasure::new(raw.atoms, raw.density, raw.window)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        SignedMeasure::from_json(&text)
    }
}

/// Rescaled Airy empirical measure
/// (1/k)Σ δ_{−k^{−2/3}a_i} − (1/π)√x 1_{x≥0} dx, restricted to [−R, R].
///
/// `points` are descending. A nonempty list must reach past the window,
/// −k^{−2/3}a_last > R, or the measure would silently miss atoms.
pub fn nu_k(points: &[f64], k: f64, r: f64) -> Result<SignedMeasure> {
    if !(k >= 1.0) {
        return Err(Error::domain(format!("k must be at least 1, got {k}")));
    }
    if !(r > 0.0) {
        return Err(Error::domain(format!("R must be positive, got {r}")));
    }
    if points.windows(2).any(|w| !(w[0] >= w[1])) {
        return Err(Error::domain("points must be given in descending order"));
    }
    let scale = k.powf(-2.0 / 3.0);
    if let Some(&last) = points.last() {
        if -scale * last <= r {
            let required = airy_count(r / scale, AirySpectrumMode::Asymptotic) + 1;
            return Err(Error::Truncation {
                reason: format!(
                    "the last point maps to {} which does not exceed R = {r}",
                    -scale * last
                ),
                required,
            });
        }
    }
    let atoms = points
        .iter()
        .map(|&a| (-scale * a, 1.0 / k))
        .filter(|&(x, _)| (-r..=r).contains(&x))
        .collect();
    SignedMeasure::new(atoms, Density::AiryReference { sign: -1.0 }, (-r, r))
}

/// b_i = (n/k)^{2/3}(2 − n^{−1/2}λ_i).
pub fn edge_coordinate(lambda: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    (n / k as f64).powf(2.0 / 3.0) * (2.0 - lambda / n.sqrt())
}

/// (1/k)Σ δ_{b_i} − μ₀ restricted to [−R, R].
pub fn mu_nk(eigs: &[f64], n: usize, k: usize, r: f64) -> Result<SignedMeasure> {
    if k == 0 || n < k {
        return Err(Error::domain(format!("need n ≥ k ≥ 1, got n={n}, k={k}")));
    }
    if !(r > 0.0) {
        return Err(Error::domain(format!("R must be positive, got {r}")));
    }
    let atoms = eigs
        .iter()
        .map(|&l| (edge_coordinate(l, n, k), 1.0 / k as f64))
        .filter(|&(x, _)| (-r..=r).contains(&x))
        .collect();
    SignedMeasure::new(atoms, Density::SemicircleRescaled { n, k, sign: -1.0 }, (-r, r))
}

/// Result of [`bl_distance`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlDistance {
    pub value: f64,
    /// h·(|μ| + |ν|), the discretization error bound.
    pub error_bound: f64,
    /// Two distinct atoms are closer than the grid spacing.
    pub under_resolved: bool,
    /// Grid spacing h = 2R/m.
    pub h: f64,
    /// Optimal test function at the m + 1 grid nodes.
    pub test_function: Vec<f64>,
}

/// Loads of `mu` on the nodes −R + jh, j = 0..=m, against the piecewise
/// linear interpolant of a test function.
pub fn grid_loads(mu: &SignedMeasure, r: f64, m: usize) -> Vec<f64> {
    let h = 2.0 * r / m as f64;
    let mut loads = vec![0.0; m + 1];
    for &(x, w) in &mu.atoms {
        if x < -r || x > r {
            continue;
        }
        let t = (x + r) / h;
        let j = (t.floor() as usize).min(m);
        let frac = t - j as f64;
        if frac <= 0.0 || j == m {
            loads[j] += w;
        } else {
            loads[j] += w * (1.0 - frac);
            loads[j + 1] += w * frac;
        }
    }
    if mu.density == Density::None {
        return loads;
    }
    let lo = mu.window.0.max(-r);
    let hi = mu.window.1.min(r);
    let breaks = mu.density_breaks();
    for j in 0..m {
        let x0 = -r + j as f64 * h;
        let x1 = if j + 1 == m { r } else { -r + (j + 1) as f64 * h };
        let a = x0.max(lo);
        let b = x1.min(hi);
        if !(b > a) {
            continue;
        }
        let mut pieces = vec![a];
        pieces.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
        pieces.push(b);
        for w in pieces.windows(2) {
            let left = quad::simpson(|x| mu.pdf(x) * (x1 - x) / h, w[0], w[1]);
            let right = quad::simpson(|x| mu.pdf(x) * (x - x0) / h, w[0], w[1]);
            loads[j] += left;
            loads[j + 1] += right;
        }
    }
    loads
}

/// Bounded-Lipschitz distance on [−R, R]: the supremum of ∫f d(μ − ν) over
/// f with |f| ≤ 1 and Lipschitz constant ≤ 1, computed over piecewise
/// linear f on m intervals.
pub fn bl_distance(mu: &SignedMeasure, nu: &SignedMeasure, r: f64, m: usize) -> Result<BlDistance> {
    bl_distance_impl(mu, nu, r, m, false)
}

/// Variant with test functions vanishing at ±R.
pub fn bl_distance_pinned(mu: &SignedMeasure, nu: &SignedMeasure, r: f64, m: usize) -> Result<BlDistance> {
    bl_distance_impl(mu, nu, r, m, true)
}

fn bl_distance_impl(mu: &SignedMeasure, nu: &SignedMeasure, r: f64, m: usize, pinned: bool) -> Result<BlDistance> {
    if m < MIN_GRID {
        return Err(Error::domain(format!("grid needs at least {MIN_GRID} intervals, got {m}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("R must be positive, got {r}")));
    }
    let h = 2.0 * r / m as f64;
    let lm = grid_loads(mu, r, m);
    let ln = grid_loads(nu, r, m);
    let cost_f: Vec<f64> = lm.iter().zip(&ln).map(|(a, b)| a - b).collect();

    let (fs, rows) = (m + 1, m);
    let cols = fs + rows;
    let mut a = vec![0.0; rows * cols];
    for j in 0..rows {
        a[j * cols + j] = -1.0;
        a[j * cols + j + 1] = 1.0;
        a[j * cols + fs + j] = 1.0;
    }
    let mut cost = cost_f;
    cost.resize(cols, 0.0);
    // implied bounds keep f ≡ lower a feasible starting point when pinned
    let bound: Vec<f64> = (0..fs)
        .map(|j| {
            if pinned {
                1f64.min(j as f64 * h).min((m - j) as f64 * h)
            } else {
                1.0
            }
        })
        .collect();
    let mut lower: Vec<f64> = bound.iter().map(|b| -b).collect();
    let mut upper = bound;
    lower.resize(cols, -h);
    upper.resize(cols, h);
    let basis = (fs..cols).collect();
    let mut lp = BoundedLp::new(rows, cols, a, cost, lower, upper, basis)?;
    let value = lp.solve()?;
    let test_function = lp.solution()[..fs].to_vec();

    let mut positions: Vec<f64> = mu
        .atoms
        .iter()
        .chain(&nu.atoms)
        .map(|a| a.0)
        .filter(|x| (-r..=r).contains(x))
        .collect();
    positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let under_resolved = positions.windows(2).any(|w| w[1] > w[0] && w[1] - w[0] < h);

    let error_bound = h * (mu.restrict(-r, r).total_variation() + nu.restrict(-r, r).total_variation());
    Ok(BlDistance {
        value: value.max(0.0),
        error_bound,
        under_resolved,
        h,
        test_function,
    })
}
