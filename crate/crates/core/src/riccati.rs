//! The stochastic Airy diffusion
//!
//! ```text
//! dp = (x − λ − p²) dx + (2/√β) dB_x,   p(0) = +∞,
//! ```
//!
//! restarted at +∞ after every explosion to −∞. The number of explosions
//! N(λ) equals the number of eigenvalues of the stochastic Airy operator H_β
//! that are at most λ.
//!
//! Paths are simulated by Euler–Maruyama on the uniform grid x_j = j·h0.
//! While |p| ≤ 2 the state is p; beyond that it is w = −1/p, which obeys
//! the Itô equation
//!
//! ```text
//! dw = ((x − λ) w² − 1 + σ² w³) dx + σ w² dB_x,   σ = 2/√β,
//! ```
//!
//! and is regular through the pole: an explosion is a downward zero
//! crossing of w, and the restart at +∞ is the continuation w < 0. The
//! Brownian increments depend only on the grid and the stream, so paths for
//! different λ with the same stream share their noise.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Report;
use crate::rng::{substream, StreamId};
use crate::stats::{self, summarize};

const P_TO_W: f64 = 2.0;
const W_TO_P: f64 = 1.0;

/// Simulation horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    /// max(2λ, λ + 10): explosions beyond it are exponentially unlikely.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    pub beta: f64,
    pub lambda: f64,
    /// Grid step, in (0, 0.01].
    pub h0: f64,
    pub horizon: Horizon,
}

impl DiffusionConfig {
    pub const DEFAULT_STEP: f64 = 1e-3;

    pub fn new(beta: f64, lambda: f64) -> Self {
        DiffusionConfig {
            beta,
            lambda,
            h0: Self::DEFAULT_STEP,
            horizon: Horizon::Auto,
        }
    }

    pub fn with_step(mut self, h0: f64) -> Self {
        self.h0 = h0;
        self
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::domain(format!("beta must be positive, got {}", self.beta)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::domain("lambda must be finite"));
        }
        if !(self.h0 > 0.0 && self.h0 <= 0.01) {
            return Err(Error::domain(format!("step h0 must lie in (0, 0.01], got {}", self.h0)));
        }
        if let Horizon::Fixed(x) = self.horizon {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::domain(format!("fixed horizon must be positive, got {x}")));
            }
        }
        Ok(())
    }

    /// Right end of the simulated interval.
    pub fn x_max(&self) -> f64 {
        match self.horizon {
            Horizon::Auto => (2.0 * self.lambda).max(self.lambda + 10.0),
            Horizon::Fixed(x) => x,
        }
    }

    fn sigma(&self) -> f64 {
        2.0 / self.beta.sqrt()
    }
}

/// Explosion times of one path and its terminal state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRecord {
    pub blowup_times: Vec<f64>,
    pub terminal_x: f64,
    /// Terminal value of p (±∞ is represented by a huge finite number).
    pub terminal_p: f64,
    pub path_seed: StreamIdRepr,
}

/// Serializable copy of a [`StreamId`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamIdRepr {
    pub seed: u64,
    pub replica: u64,
    pub substream: u64,
}

impl From<StreamId> for StreamIdRepr {
    fn from(s: StreamId) -> Self {
        StreamIdRepr {
            seed: s.seed,
            replica: s.replica,
            substream: s.substream,
        }
    }
}

impl BlowupRecord {
    /// N(λ): the number of explosions.
    pub fn count(&self) -> usize {
        self.blowup_times.len()
    }
}

fn run_path(config: &DiffusionConfig, stream: StreamId, max_blowups: usize) -> BlowupRecord {
    let mut rng = stream.rng();
    let sigma = config.sigma();
    let sigma2 = sigma * sigma;
    let x_max = config.x_max();
    let lambda = config.lambda;
    let steps = (x_max / config.h0).ceil() as u64;

    let mut in_w = true;
    let mut y = 0.0; // w = 0⁻ is p = +∞
    let mut times = Vec::new();
    let mut x = 0.0;
    for j in 0..steps {
        let x_next = ((j + 1) as f64 * config.h0).min(x_max);
        let h = x_next - x;
        if h <= 0.0 {
            break;
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        let db = h.sqrt() * z;
        let v = x - lambda;
        if in_w {
            let w = y;
            let next = w + (v * w * w - 1.0 + sigma2 * w * w * w) * h + sigma * w * w * db;
            if w > 0.0 && next <= 0.0 {
                times.push(x + h * w / (w - next));
                if times.len() >= max_blowups {
                    y = next;
                    x = x_next;
                    break;
                }
            }
            y = next;
            if y.abs() > W_TO_P {
                in_w = false;
                y = -1.0 / y;
            }
        } else {
            let p = y;
            y = p + (v - p * p) * h + sigma * db;
            if y.abs() > P_TO_W {
                in_w = true;
                y = -1.0 / y;
            }
        }
        x = x_next;
    }
    let terminal_p = if in_w {
        if y == 0.0 {
            f64::MAX
        } else {
            -1.0 / y
        }
    } else {
        y
    };
    BlowupRecord {
        blowup_times: times,
        terminal_x: x,
        terminal_p,
        path_seed: stream.into(),
    }
}

/// Simulates one path over the configured horizon.
pub fn simulate_path(config: &DiffusionConfig, stream: StreamId) -> Result<BlowupRecord> {
    config.validate()?;
    Ok(run_path(config, stream, usize::MAX))
}

/// Stream used for replica `replica` of an experiment seeded with `seed`.
pub fn path_stream(seed: u64, replica: u64) -> StreamId {
    StreamId::new(seed, replica, substream::BROWNIAN)
}

/// N(λ) for one path with the automatic horizon.
pub fn count_below(lambda: f64, beta: f64, stream: StreamId) -> Result<usize> {
    let config = DiffusionConfig::new(beta, lambda);
    simulate_path(&config, stream).map(|r| r.count())
}

/// Counts N(λ) for replicas `0..reps` of `seed`, in replica order.
pub fn counts(config: &DiffusionConfig, seed: u64, reps: usize) -> Result<Vec<usize>> {
    config.validate()?;
    Ok((0..reps as u64)
        .into_par_iter()
        .map(|i| run_path(config, path_stream(seed, i), usize::MAX).count())
        .collect())
}

/// Interval containing the first explosion time when the Brownian
/// motion stays small: [π/√((1+ε)(1+δ)a), π/√((1−ε)((1−δ)a − 2π/√a))].
pub fn first_blowup_interval(a: f64, eps: f64, delta: f64) -> (f64, f64) {
    let lo = PI / ((1.0 + eps) * (1.0 + delta) * a).sqrt();
    let hi = PI / ((1.0 - eps) * ((1.0 - delta) * a - 2.0 * PI / a.sqrt())).sqrt();
    (lo, hi)
}

/// Bound 4·exp(−βδεa^{3/2}/(32π)) on the probability of leaving the
/// small-noise event behind [`first_blowup_interval`].
pub fn first_blowup_interval_bound(a: f64, beta: f64, eps: f64, delta: f64) -> f64 {
    4.0 * (-beta * delta * eps * a.powf(1.5) / (32.0 * PI)).exp()
}

/// Threshold 4π/√a + 4M/a and bound 4·exp(−βMa/64) for a late first
/// explosion, valid for π√a ≤ M ≤ a²/100.
pub fn late_blowup_threshold(a: f64, beta: f64, m: f64) -> (f64, f64) {
    (4.0 * PI / a.sqrt() + 4.0 * m / a, 4.0 * (-beta * m * a / 64.0).exp())
}

/// Smallest `a` accepted by [`blowup_time_experiment`].
pub const BLOWUP_EXPERIMENT_MIN_A: f64 = 15.0;

/// Empirical distribution of the first explosion time Δ under the drift
/// x − a − p².
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupTimeSample {
    pub a: f64,
    pub beta: f64,
    /// First explosion times in replica order; `None` when the path did not
    /// explode before the horizon.
    pub times: Vec<Option<f64>>,
}

impl BlowupTimeSample {
    /// Fraction of replicas whose Δ is missing or exceeds `t`.
    pub fn fraction_above(&self, t: f64) -> f64 {
        let n = self.times.iter().filter(|d| d.is_none_or(|d| d > t)).count();
        n as f64 / self.times.len() as f64
    }

    /// Fraction of replicas whose Δ is missing or outside `[lo, hi]`.
    pub fn fraction_outside(&self, lo: f64, hi: f64) -> f64 {
        let n = self
            .times
            .iter()
            .filter(|d| d.is_none_or(|d| d < lo || d > hi))
            .count();
        n as f64 / self.times.len() as f64
    }

    pub fn finite_times(&self) -> Vec<f64> {
        self.times.iter().flatten().copied().collect()
    }

    /// Summary with mean, quantiles and the fraction outside the small-noise
    /// interval for ε = δ = 1/4.
    pub fn report(&self) -> Report {
        let mut report = Report::new(self.times.len());
        let mut finite = self.finite_times();
        finite.sort_by(|x, y| x.partial_cmp(y).unwrap());
        report.set_summary("delta_mean", &summarize(&finite));
        for (name, q) in [("delta_q05", 0.05), ("delta_q50", 0.5), ("delta_q95", 0.95)] {
            report.set(name, stats::quantile(&finite, q));
        }
        let (lo, hi) = first_blowup_interval(self.a, 0.25, 0.25);
        report.set("interval_lo", lo).set("interval_hi", hi);
        let frac = self.fraction_outside(lo, hi);
        let n = self.times.len() as f64;
        report.set_with_err("fraction_outside", frac, (frac * (1.0 - frac) / n).sqrt());
        report.set("fraction_outside_bound", first_blowup_interval_bound(self.a, self.beta, 0.25, 0.25).min(1.0));
        report.set("no_blowup_fraction", self.times.iter().filter(|d| d.is_none()).count() as f64 / n);
        report
    }
}

/// First explosion times of `reps` independent paths with drift x − a − p².
pub fn blowup_time_experiment(a: f64, beta: f64, reps: usize, seed: u64) -> Result<BlowupTimeSample> {
    blowup_time_experiment_with_step(a, beta, reps, seed, DiffusionConfig::DEFAULT_STEP)
}

pub fn blowup_time_experiment_with_step(
    a: f64,
    beta: f64,
    reps: usize,
    seed: u64,
    h0: f64,
) -> Result<BlowupTimeSample> {
    if !(a >= BLOWUP_EXPERIMENT_MIN_A) {
        return Err(Error::domain(format!(
            "blow-up time bounds need a > (12π)^(2/3) ≈ 11.2; this experiment requires a ≥ {BLOWUP_EXPERIMENT_MIN_A}, got {a}"
        )));
    }
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    // Δ ≤ 4π/√a + 4M/a with overwhelming probability for M up to a²/100
    let horizon = 4.0 * PI / a.sqrt() + a / 25.0 + 1.0;
    let config = DiffusionConfig::new(beta, a)
        .with_step(h0)
        .with_horizon(Horizon::Fixed(horizon));
    config.validate()?;
    let times = (0..reps as u64)
        .into_par_iter()
        .map(|i| run_path(&config, path_stream(seed, i), 1).blowup_times.first().copied())
        .collect();
    Ok(BlowupTimeSample { a, beta, times })
}

/// Monte Carlo frequency of {N(Rk^{2/3}) ≥ ηR^{3/2}k}, reported as
/// `frequency`.
pub fn deviation_event_probability(r: f64, k: f64, eta: f64, beta: f64, reps: usize, seed: u64) -> Result<Report> {
    let mut report = deviation_event_frequencies(r, k, &[eta], beta, reps, seed)?;
    let key = frequency_key(eta);
    let (value, err) = (report.get(&key).unwrap(), report.stderr(&key).unwrap());
    report.set_with_err("frequency", value, err).set("eta", eta);
    Ok(report)
}

fn frequency_key(eta: f64) -> String {
    format!("frequency_eta{eta}")
}

/// Frequencies of the deviation event for several η on shared paths, so the
/// nested events are compared path by path.
pub fn deviation_event_frequencies(r: f64, k: f64, etas: &[f64], beta: f64, reps: usize, seed: u64) -> Result<Report> {
    if etas.is_empty() || etas.iter().any(|&e| !(e >= 15.0)) {
        return Err(Error::domain(format!("every eta must be at least 15, got {etas:?}")));
    }
    if !(r >= 1.0) {
        return Err(Error::domain(format!("R must be at least 1, got {r}")));
    }
    if !(k >= 1.0) {
        return Err(Error::domain(format!("k must be at least 1, got {k}")));
    }
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    let lambda = r * k.powf(2.0 / 3.0);
    let scale = r.powf(1.5) * k;
    let eta_max = etas.iter().copied().fold(0.0, f64::max);
    let needed = (eta_max * scale).ceil().max(1.0) as usize;
    let config = DiffusionConfig::new(beta, lambda);
    config.validate()?;
    let counts: Vec<usize> = (0..reps as u64)
        .into_par_iter()
        .map(|i| run_path(&config, path_stream(seed, i), needed).count())
        .collect();
    let mut report = Report::new(reps);
    report.set("lambda", lambda);
    for &eta in etas {
        let hits: Vec<bool> = counts.iter().map(|&c| c as f64 >= eta * scale).collect();
        report.set_summary(&frequency_key(eta), &stats::frequency(&hits));
    }
    report.set("count_mean", summarize(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>()).mean);
    Ok(report)
}
