//! Tridiagonal Gaussian β-ensembles.
//!
//! H_{β,n} has diagonal √(2/β)·ξ_i with ξ_i standard normal and
//! off-diagonal Y_{n−i}/√β at position (i, i+1), Y_k ~ χ_{βk}. Its top
//! eigenvalues, centred at 2√n and scaled by n^{1/6}, converge to minus the
//! eigenvalues of the stochastic Airy operator.
//!
//! Indices in the public API are 1-based where they name matrix rows
//! (`discrete_riccati`, `decay_diagnostics`, rigidity ranks).

use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Report;
use crate::rng::{substream, StreamId};
use crate::spectra::classical_location;
use crate::stats::{self, summarize};

/// Pivot used in place of an exact zero in the Sturm recursion.
const ZERO_PIVOT: f64 = -1e-300;

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalSym {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl TridiagonalSym {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::domain("tridiagonal matrix needs at least one row"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::domain(format!(
                "off-diagonal length {} does not match diagonal length {}",
                offdiag.len(),
                diag.len()
            )));
        }
        Ok(TridiagonalSym { diag, offdiag })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
                left + self.diag[i].abs() + right
            })
            .fold(0.0, f64::max)
    }

    /// y = T x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.offdiag[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Two-column CSV dump `diag,offdiag`; the last off-diagonal cell is empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("diag,offdiag\n");
        for (i, d) in self.diag.iter().enumerate() {
            match self.offdiag.get(i) {
                Some(e) => out.push_str(&format!("{d:e},{e:e}\n")),
                None => out.push_str(&format!("{d:e},\n")),
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "diag,offdiag" => {}
            _ => return Err(Error::Io("matrix dump must start with a diag,offdiag header".into())),
        }
        let mut diag = Vec::new();
        let mut offdiag = Vec::new();
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Io(format!("bad number {s:?} in matrix dump: {e}")))
        };
        for line in lines {
            let (d, e) = line
                .split_once(',')
                .ok_or_else(|| Error::Io(format!("malformed matrix dump line {line:?}")))?;
            diag.push(parse(d)?);
            if !e.trim().is_empty() {
                offdiag.push(parse(e)?);
            }
        }
        TridiagonalSym::new(diag, offdiag).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Samples H_{β,n} from the stream `stream`.
pub fn sample_gbeta(n: usize, beta: f64, stream: StreamId) -> Result<TridiagonalSym> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    if n < 2 {
        return Err(Error::domain(format!("matrix size must be at least 2, got {n}")));
    }
    let mut rng = stream.rng();
    let diag_scale = (2.0 / beta).sqrt();
    let diag = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            diag_scale * z
        })
        .collect();
    let inv_sqrt_beta = 1.0 / beta.sqrt();
    let mut offdiag = Vec::with_capacity(n - 1);
    for i in 1..n {
        let shape = beta * (n - i) as f64 / 2.0;
        let gamma = Gamma::new(shape, 1.0).map_err(|e| Error::numerical(format!("gamma sampler: {e}")))?;
        let g: f64 = gamma.sample(&mut rng);
        offdiag.push((2.0 * g).sqrt() * inv_sqrt_beta);
    }
    TridiagonalSym::new(diag, offdiag)
}

/// Stream used for the matrix of replica `replica`.
pub fn matrix_stream(seed: u64, replica: u64) -> StreamId {
    StreamId::new(seed, replica, substream::MATRIX)
}

/// Number of eigenvalues strictly below `x`, by counting negative LDLᵀ
/// pivots of T − x. A zero pivot is replaced by −1e−300 and counted.
pub fn count_below(t: &TridiagonalSym, x: f64) -> usize {
    let mut count = 0;
    let mut prev = 1.0;
    for (i, &d) in t.diag.iter().enumerate() {
        let mut pivot = d - x;
        if i > 0 {
            let e = t.offdiag[i - 1];
            pivot -= e * e / prev;
        }
        if pivot == 0.0 {
            pivot = ZERO_PIVOT;
        }
        if pivot < 0.0 {
            count += 1;
        }
        prev = pivot;
    }
    count
}

/// Number of rescaled edge eigenvalues with −λ̃_i ≤ λ, the matrix analogue
/// of the blow-up count N(λ).
pub fn edge_count(t: &TridiagonalSym, lambda: f64) -> usize {
    let n = t.n() as f64;
    t.n() - count_below(t, 2.0 * n.sqrt() - lambda * n.powf(-1.0 / 6.0))
}

/// Top eigenvalues of one matrix, in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub values: Vec<f64>,
    pub n: usize,
    pub beta: Option<f64>,
    pub rescaled: bool,
}

impl SpectrumSample {
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    /// The edge rescaling of an unrescaled sample.
    pub fn rescale(&self) -> SpectrumSample {
        if self.rescaled {
            return self.clone();
        }
        SpectrumSample {
            values: self.values.iter().map(|&v| rescale_value(v, self.n)).collect(),
            n: self.n,
            beta: self.beta,
            rescaled: true,
        }
    }
}

/// (λ − 2√n)·n^{1/6}.
pub fn rescale_value(lambda: f64, n: usize) -> f64 {
    let n = n as f64;
    (lambda - 2.0 * n.sqrt()) * n.powf(1.0 / 6.0)
}

pub fn rescale_edge(values: &[f64], n: usize) -> Result<SpectrumSample> {
    if values.windows(2).any(|w| !(w[0] >= w[1])) {
        return Err(Error::domain("eigenvalues must be given in descending order"));
    }
    Ok(SpectrumSample {
        values: values.iter().map(|&v| rescale_value(v, n)).collect(),
        n,
        beta: None,
        rescaled: true,
    })
}

fn spectral_bracket(t: &TridiagonalSym) -> Result<(f64, f64)> {
    let n = t.n();
    let mut half = 4.0 * (n as f64).sqrt();
    for _ in 0..=10 {
        if count_below(t, -half) == 0 && count_below(t, half) == n {
            return Ok((-half, half));
        }
        half *= 2.0;
    }
    Err(Error::numerical("could not bracket the spectrum after 10 widenings"))
}

/// The `k` largest eigenvalues, each located by bisection on Sturm counts to
/// a bracket of width at most `tol`.
pub fn top_k_eigenvalues(t: &TridiagonalSym, k: usize, tol: f64) -> Result<SpectrumSample> {
    let n = t.n();
    if k == 0 || k > n {
        return Err(Error::domain(format!("k must lie in 1..={n}, got {k}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let (lo0, hi0) = spectral_bracket(t)?;
    let mut values = Vec::with_capacity(k);
    let mut upper = hi0;
    for j in 1..=k {
        // the eigenvalue of ascending index m is inf{x : count_below(x) > m}
        let m = n - j;
        let (mut lo, mut hi) = (lo0, upper);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(t, mid) > m {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        values.push(value);
        upper = hi;
    }
    Ok(SpectrumSample {
        values,
        n,
        beta: None,
        rescaled: false,
    })
}

/// Unit eigenvector for the eigenvalue nearest `estimate`, normalized with
/// its first nonzero entry positive.
///
/// Uses the twisted factorization of T − s: the vector solves
/// (T − s) z = γ_r e_r exactly, where r minimizes |γ_r|. Both recursions
/// run towards the twist index, so every component keeps its relative
/// accuracy even where the vector is hundreds of orders of magnitude below
/// its peak. If the residual is too large, s moves to the Rayleigh quotient.
pub fn eigenvector(t: &TridiagonalSym, estimate: f64) -> Result<Vec<f64>> {
    let n = t.n();
    let norm = t.norm_inf();
    let tiny = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
    let guard = |p: f64| if p.abs() < tiny { tiny.copysign(p) } else { p };
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let mut shift = estimate;
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..20 {
        plus[0] = guard(t.diag[0] - shift);
        for i in 1..n {
            let e = t.offdiag[i - 1];
            plus[i] = guard(t.diag[i] - shift - e * e / plus[i - 1]);
        }
        minus[n - 1] = guard(t.diag[n - 1] - shift);
        for i in (0..n - 1).rev() {
            let e = t.offdiag[i];
            minus[i] = guard(t.diag[i] - shift - e * e / minus[i + 1]);
        }
        let r = (0..n)
            .min_by(|&a, &b| {
                let ga = (plus[a] + minus[a] - (t.diag[a] - shift)).abs();
                let gb = (plus[b] + minus[b] - (t.diag[b] - shift)).abs();
                ga.partial_cmp(&gb).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        let mut z = vec![0.0; n];
        z[r] = 1.0;
        for i in (0..r).rev() {
            z[i] = -(t.offdiag[i] / plus[i]) * z[i + 1];
        }
        for i in r..n - 1 {
            z[i + 1] = -(t.offdiag[i] / minus[i + 1]) * z[i];
        }
        let scale = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::numerical("eigenvector recursion overflowed"));
        }
        for v in z.iter_mut() {
            *v /= scale;
        }
        let tz = t.apply(&z);
        let rayleigh: f64 = tz.iter().zip(&z).map(|(a, b)| a * b).sum();
        let residual = tz
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - rayleigh * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= 1e-8 * norm {
            if let Some(first) = z.iter().find(|v| **v != 0.0) {
                if *first < 0.0 {
                    z.iter_mut().for_each(|v| *v = -*v);
                }
            }
            return Ok(z);
        }
        if best.as_ref().is_none_or(|(r0, _)| residual < *r0) {
            best = Some((residual, z));
        }
        shift = rayleigh;
    }
    Err(Error::numerical(format!(
        "inverse iteration did not converge: residual {:e}",
        best.map_or(f64::NAN, |b| b.0)
    )))
}

/// p(i) = n^{1/3}(φ(i) − φ(i−1))/φ(i−1) for i = 2..=len, with `None` where
/// φ(i−1) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteRiccati {
    pub values: Vec<Option<f64>>,
}

impl DiscreteRiccati {
    /// Value at the 1-based row index `i ≥ 2`.
    pub fn at(&self, i: usize) -> Option<f64> {
        i.checked_sub(2).and_then(|j| self.values.get(j).copied().flatten())
    }

    /// Row indices where φ(i−1) vanished.
    pub fn gaps(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(j, _)| j + 2)
            .collect()
    }

    /// Whether p is negative everywhere after its last sign change.
    pub fn negative_after_last_sign_change(&self) -> bool {
        match self.values.iter().rev().flatten().next() {
            Some(&last) => last < 0.0,
            None => false,
        }
    }
}

pub fn discrete_riccati(phi: &[f64], n: usize) -> DiscreteRiccati {
    let scale = (n as f64).cbrt();
    let values = phi
        .windows(2)
        .map(|w| {
            if w[0] == 0.0 {
                None
            } else {
                Some(scale * (w[1] - w[0]) / w[0])
            }
        })
        .collect();
    DiscreteRiccati { values }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// φ has one strict sign on rows i_star..=len.
    pub sign_constant_beyond: bool,
    /// |φ(len)|/|φ(len − 1)|.
    pub last_ratio: f64,
    /// Least-squares slope of log|φ(i)| against (i n^{−1/3})^{3/2} over
    /// rows i_star..len−1.
    pub decay_fit: f64,
}

/// Tail diagnostics of an eigenvector; `i_star` is a 1-based row.
pub fn decay_diagnostics(phi: &[f64], n: usize, i_star: usize) -> Result<DecayReport> {
    let len = phi.len();
    if i_star == 0 || i_star >= len {
        return Err(Error::domain(format!("i_star must lie in 1..{len}, got {i_star}")));
    }
    let tail = &phi[i_star - 1..];
    let sign_constant_beyond = tail.iter().all(|&v| v > 0.0) || tail.iter().all(|&v| v < 0.0);
    let last_ratio = (phi[len - 1] / phi[len - 2]).abs();
    let scale = (n as f64).powf(-1.0 / 3.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (i_star..len)
        .filter(|&i| phi[i - 1] != 0.0)
        .map(|i| ((i as f64 * scale).powf(1.5), phi[i - 1].abs().ln()))
        .unzip();
    let decay_fit = stats::linear_fit(&xs, &ys).map_or(f64::NAN, |(_, slope)| slope);
    Ok(DecayReport {
        sign_constant_beyond,
        last_ratio,
        decay_fit,
    })
}

/// Classical locations γ_1 > … > γ_n of the semicircle on [−2, 2].
pub fn classical_locations(n: usize) -> Result<Vec<f64>> {
    (1..=n).map(|j| classical_location(j, n)).collect()
}

/// Fraction of ranks k with |n^{−1/2}λ_k − γ_k| ≥ n^{−2/3+a}·k̂^{−1/3},
/// k̂ = min(k, n + 1 − k), where λ_k is the k-th largest eigenvalue.
///
/// Each rank is decided by two Sturm counts, so no eigenvalue is computed.
pub fn rigidity_violation_fraction(t: &TridiagonalSym, a: f64, gammas: &[f64]) -> f64 {
    let n = t.n();
    let nf = n as f64;
    let root = nf.sqrt();
    let base = nf.powf(-2.0 / 3.0 + a);
    let mut violations = 0usize;
    for k in 1..=n {
        let khat = k.min(n + 1 - k) as f64;
        let width = base * khat.powf(-1.0 / 3.0);
        let lower = root * (gammas[k - 1] - width);
        let upper = root * (gammas[k - 1] + width);
        // λ_k ≤ lower  ⇔ at least n − k + 1 eigenvalues below lower
        // λ_k ≥ upper  ⇔ at most n − k eigenvalues below upper
        if count_below(t, lower) > n - k || count_below(t, upper) <= n - k {
            violations += 1;
        }
    }
    violations as f64 / nf
}

/// Monte Carlo rigidity statistics over `reps` matrices.
pub fn rigidity_stats(n: usize, beta: f64, a: f64, reps: usize, seed: u64) -> Result<Report> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::domain(format!("rigidity exponent a must lie in (0, 1], got {a}")));
    }
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    let gammas = classical_locations(n)?;
    let fractions = (0..reps as u64)
        .into_par_iter()
        .map(|i| sample_gbeta(n, beta, matrix_stream(seed, i)).map(|t| rigidity_violation_fraction(&t, a, &gammas)))
        .collect::<Result<Vec<f64>>>()?;
    let any: Vec<bool> = fractions.iter().map(|&f| f > 0.0).collect();
    let mut report = Report::new(reps);
    report
        .set_summary("violation_fraction", &summarize(&fractions))
        .set("violation_fraction_max", fractions.iter().copied().fold(0.0, f64::max))
        .set_summary("any_violation", &stats::frequency(&any))
        .set("n", n as f64)
        .set("a", a);
    Ok(report)
}

/// Top `k` rescaled eigenvalues of `reps` independent matrices.
pub fn edge_samples(n: usize, beta: f64, k: usize, reps: usize, seed: u64, tol: f64) -> Result<Vec<SpectrumSample>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let t = sample_gbeta(n, beta, matrix_stream(seed, i))?;
            Ok(top_k_eigenvalues(&t, k, tol)?.with_beta(beta).rescale())
        })
        .collect()
}

/// Mean and variance of the top rescaled eigenvalue.
pub fn edge_moments(samples: &[SpectrumSample]) -> (f64, f64) {
    let top: Vec<f64> = samples.iter().map(|s| s.values[0]).collect();
    let s = summarize(&top);
    (s.mean, s.variance)
}
