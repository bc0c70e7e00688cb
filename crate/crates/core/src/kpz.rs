//! Lower-tail estimators for the KPZ equation built from edge point
//! configurations a_1 > a_2 > …, and the closed-form tail bounds.
//!
//! With τ = T^{1/3}, the full-space estimator is
//! ∏ 1/(1 + exp(τ(s + a_k))) and the half-space one is
//! ∏ (1 + 4u·exp(τ a_k))^{−1/2}. Both are evaluated in log-space.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Report;
use crate::spectra::{airy_count, AirySpectrumMode};
use crate::stats::{self, kahan_sum, summarize};
use crate::tridiag::{count_below, matrix_stream, rescale_value, sample_gbeta, top_k_eigenvalues};

/// Exponent margin: omitted factors differ from 1 by less than e^{−40}.
pub const TRUNCATION_MARGIN: f64 = 40.0;

/// log(1 + eˣ) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn check_descending(points: &[f64]) -> Result<()> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("points must be finite"));
    }
    if points.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::domain("points must be given in descending order"));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("T must be positive, got {t}")));
    }
    Ok(t.cbrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductEstimate {
    pub value: f64,
    pub log_value: f64,
    /// Bound on the log-error from the points omitted beyond the last one.
    pub truncation_bound: f64,
}

/// Estimate of the omitted part of Σ exp(τ(c + a_k)) over k > K, using the
/// asymptotic point density √|a|/π below a_K.
fn tail_bound(tau: f64, shift: f64, last: f64) -> f64 {
    (tau * (shift + last)).exp() * (1.0 + last.abs().sqrt() / (PI * tau))
}

/// ∏ 1/(1 + exp(τ(s + a_k))) over a truncated sample of an infinite
/// configuration; the last point must satisfy a_K < −s − 40/τ. An empty
/// list is the empty product.
pub fn laplace_product(points: &[f64], s: f64, t: f64) -> Result<ProductEstimate> {
    check_descending(points)?;
    let tau = check_time(t)?;
    let threshold = -s - TRUNCATION_MARGIN / tau;
    if let Some(&last) = points.last() {
        if !(last < threshold) {
            return Err(Error::Truncation {
                reason: format!("last point {last} is not below -s - 40/T^(1/3) = {threshold}"),
                required: airy_count(-threshold, AirySpectrumMode::Asymptotic) + 1,
            });
        }
    }
    let mut estimate = laplace_product_finite(points, s, t)?;
    estimate.truncation_bound = points.last().map_or(0.0, |&a| tail_bound(tau, s, a));
    Ok(estimate)
}

/// ∏ 1/(1 + exp(τ(s + a_k))) over a complete finite configuration.
pub fn laplace_product_finite(points: &[f64], s: f64, t: f64) -> Result<ProductEstimate> {
    check_descending(points)?;
    let tau = check_time(t)?;
    let log_value = -kahan_sum(points.iter().map(|&a| softplus(tau * (s + a))));
    Ok(ProductEstimate {
        value: log_value.exp(),
        log_value,
        truncation_bound: 0.0,
    })
}

/// ∏ (1 + 4u·exp(τ a_k))^{−1/2} over a truncated sample; the last point must
/// satisfy log(4u) + τ a_K < −40.
pub fn laplace_product_halfspace(points: &[f64], u: f64, t: f64) -> Result<ProductEstimate> {
    check_descending(points)?;
    let tau = check_time(t)?;
    check_u(u)?;
    let threshold = ((1.0 / (4.0 * u)).ln() - TRUNCATION_MARGIN) / tau;
    if let Some(&last) = points.last() {
        if !(last < threshold) {
            return Err(Error::Truncation {
                reason: format!("last point {last} is not below (log(1/(4u)) - 40)/T^(1/3) = {threshold}"),
                required: airy_count(-threshold, AirySpectrumMode::Asymptotic) + 1,
            });
        }
    }
    let mut estimate = laplace_product_halfspace_finite(points, u, t)?;
    estimate.truncation_bound = points
        .last()
        .map_or(0.0, |&a| 0.5 * tail_bound(tau, (4.0 * u).ln() / tau, a));
    Ok(estimate)
}

/// Half-space product over a complete finite configuration.
pub fn laplace_product_halfspace_finite(points: &[f64], u: f64, t: f64) -> Result<ProductEstimate> {
    check_descending(points)?;
    let tau = check_time(t)?;
    check_u(u)?;
    let log4u = (4.0 * u).ln();
    let log_value = -0.5 * kahan_sum(points.iter().map(|&a| softplus(log4u + tau * a)));
    Ok(ProductEstimate {
        value: log_value.exp(),
        log_value,
        truncation_bound: 0.0,
    })
}

fn check_u(u: f64) -> Result<()> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::domain(format!("u must be positive, got {u}")));
    }
    Ok(())
}

/// Parameters of the tail bounds. `c` and `k` are the unspecified constants
/// of the bounds and must be supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpzParams {
    pub s: f64,
    pub t: f64,
    pub epsilon: f64,
    pub c: f64,
    pub k: f64,
}

impl KpzParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.s >= 0.0) || !self.s.is_finite() {
            return Err(Error::domain(format!("s must be non-negative, got {}", self.s)));
        }
        check_time(self.t)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0 / 3.0) {
            return Err(Error::domain(format!("epsilon must lie in (0, 1/3), got {}", self.epsilon)));
        }
        if !(self.c > 0.0) || !(self.k > 0.0) {
            return Err(Error::domain("constants C and K must be positive"));
        }
        if self.c * self.epsilon >= 1.0 {
            return Err(Error::domain(format!(
                "C·epsilon = {} must be below 1",
                self.c * self.epsilon
            )));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.t.cbrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpzBounds {
    pub lower: f64,
    pub upper: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    /// Logs of the individual exponential terms.
    pub log_lower_terms: Vec<f64>,
    pub log_upper_terms: Vec<f64>,
    /// s = 0: every term equals one and the bounds say nothing.
    pub degenerate: bool,
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn bounds(params: &KpzParams, five_halves: f64, cubic: f64) -> Result<KpzBounds> {
    params.validate()?;
    let KpzParams { s, epsilon, c, k, .. } = *params;
    let tau = params.tau();
    let ce = c * epsilon;
    let s52 = s.powf(2.5);
    let s3 = s.powi(3);
    let log_upper_terms = vec![
        -five_halves * (1.0 - ce) * tau * s52,
        -k * s3 - epsilon * tau * s,
        -cubic * (1.0 - ce) * s3,
    ];
    let log_lower_terms = vec![-five_halves * (1.0 + ce) * tau * s52, -cubic * (1.0 + ce) * s3];
    let log_upper = log_sum_exp(&log_upper_terms);
    let log_lower = log_sum_exp(&log_lower_terms);
    Ok(KpzBounds {
        lower: log_lower.exp(),
        upper: log_upper.exp(),
        log_lower,
        log_upper,
        log_lower_terms,
        log_upper_terms,
        degenerate: s == 0.0,
    })
}

/// Full-space lower-tail bounds with coefficients 4/(15π) and 1/12.
pub fn kpz1_bounds(params: &KpzParams) -> Result<KpzBounds> {
    bounds(params, 4.0 / (15.0 * PI), 1.0 / 12.0)
}

/// Half-space lower-tail bounds with coefficients 2/(15π) and 1/24.
pub fn kpz2_bounds(params: &KpzParams) -> Result<KpzBounds> {
    bounds(params, 2.0 / (15.0 * PI), 1.0 / 24.0)
}

/// Rescaled top eigenvalues of one GβE matrix, down to and including the
/// first one below `below`.
pub fn edge_points(n: usize, beta: f64, below: f64, seed: u64, replica: u64) -> Result<Vec<f64>> {
    let t = sample_gbeta(n, beta, matrix_stream(seed, replica))?;
    let nf = n as f64;
    let x = 2.0 * nf.sqrt() + below * nf.powf(-1.0 / 6.0);
    let above = n - count_below(&t, x);
    if above >= n {
        return Err(Error::Truncation {
            reason: format!("all {n} eigenvalues lie above the truncation level"),
            required: n + 1,
        });
    }
    let sample = top_k_eigenvalues(&t, above + 1, 1e-10)?;
    Ok(sample.values.iter().map(|&v| rescale_value(v, n)).collect())
}

/// Monte Carlo comparison of the full-space estimator with the indicator
/// 1{a_1 ≤ −s} on GβE edge samples, for each s in `s_values`.
pub fn sandwich_experiment(n: usize, beta: f64, s_values: &[f64], t: f64, reps: usize, seed: u64) -> Result<Report> {
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    if s_values.is_empty() {
        return Err(Error::domain("at least one s value is required"));
    }
    let tau = check_time(t)?;
    let s_max = s_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let below = -s_max - TRUNCATION_MARGIN / tau - 1e-9;
    let per_rep: Vec<Vec<(f64, bool)>> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let points = edge_points(n, beta, below, seed, i)?;
            s_values
                .iter()
                .map(|&s| Ok((laplace_product(&points, s, t)?.value, points[0] <= -s)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut report = Report::new(reps);
    for (j, &s) in s_values.iter().enumerate() {
        let values: Vec<f64> = per_rep.iter().map(|r| r[j].0).collect();
        let hits: Vec<bool> = per_rep.iter().map(|r| r[j].1).collect();
        let diffs: Vec<f64> = per_rep.iter().map(|r| r[j].0 - if r[j].1 { 1.0 } else { 0.0 }).collect();
        report
            .set_summary(&format!("product_s{s}"), &summarize(&values))
            .set_summary(&format!("indicator_s{s}"), &stats::frequency(&hits))
            .set_summary(&format!("difference_s{s}"), &summarize(&diffs));
    }
    Ok(report)
}
