//! Noiseless Riccati flow dq = (x − a − q²) dx started from q(0) = +∞.
//!
//! Near a pole the flow is integrated in the chart w = −1/q, where it reads
//! dw = ((x − a) w² − 1) dx and is regular; a blow-up q → −∞ is the downward
//! zero crossing of w, after which the path continues from q = +∞ without a
//! restart. Away from poles the q chart is used. Both charts are integrated
//! with classical RK4.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Drift of the Riccati flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiccatiDrift {
    /// dq = (x − a − q²) dx
    Full,
    /// dq = (−a − q²) dx
    Frozen,
}

/// Switch to the w chart once |q| exceeds this.
const Q_TO_W: f64 = 2.0;
/// Switch back to the q chart once |w| exceeds this.
const W_TO_Q: f64 = 1.0;

#[derive(Clone, Copy, PartialEq)]
enum Chart {
    Q,
    W,
}

struct Flow {
    a: f64,
    drift: RiccatiDrift,
}

impl Flow {
    fn potential(&self, x: f64) -> f64 {
        match self.drift {
            RiccatiDrift::Full => x - self.a,
            RiccatiDrift::Frozen => -self.a,
        }
    }

    fn rhs(&self, chart: Chart, x: f64, y: f64) -> f64 {
        let v = self.potential(x);
        match chart {
            Chart::Q => v - y * y,
            Chart::W => v * y * y - 1.0,
        }
    }

    fn rk4(&self, chart: Chart, x: f64, y: f64, h: f64) -> f64 {
        let k1 = self.rhs(chart, x, y);
        let k2 = self.rhs(chart, x + 0.5 * h, y + 0.5 * h * k1);
        let k3 = self.rhs(chart, x + 0.5 * h, y + 0.5 * h * k2);
        let k4 = self.rhs(chart, x + h, y + h * k3);
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }

    fn step_size(&self, x: f64) -> f64 {
        2e-4 / (1.0 + self.potential(x).abs().sqrt())
    }
}

/// All blow-up times of the noiseless flow on `[0, horizon]`, at most
/// `max_count` of them.
pub fn riccati_ode_blowups(a: f64, drift: RiccatiDrift, horizon: f64, max_count: usize) -> Vec<f64> {
    let flow = Flow { a, drift };
    let mut times = Vec::new();
    let mut chart = Chart::W;
    let mut y = 0.0;
    let mut x = 0.0;
    while x < horizon && times.len() < max_count {
        let h = flow.step_size(x).min(horizon - x);
        let next = flow.rk4(chart, x, y, h);
        if chart == Chart::W && y > 0.0 && next <= 0.0 {
            // refine the crossing inside the step
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if flow.rk4(chart, x, y, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * (x + hi) {
                    break;
                }
            }
            times.push(x + 0.5 * (lo + hi));
        }
        x += h;
        y = next;
        match chart {
            Chart::Q if y.abs() > Q_TO_W => {
                chart = Chart::W;
                y = -1.0 / y;
            }
            Chart::W if y.abs() > W_TO_Q => {
                chart = Chart::Q;
                y = -1.0 / y;
            }
            _ => {}
        }
    }
    times
}

/// First blow-up time Δ of the flow started at q(0) = +∞.
///
/// With frozen drift the exact value is π/√a. With the full drift the flow
/// blows up only when `a` exceeds the first Airy eigenvalue; otherwise a
/// numerical error is returned.
pub fn riccati_ode_blowup(a: f64, frozen: bool) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("Riccati parameter a must be positive, got {a}")));
    }
    let (drift, horizon) = if frozen {
        (RiccatiDrift::Frozen, 2.0 * PI / a.sqrt() + 1.0)
    } else {
        (RiccatiDrift::Full, (2.0 * a).max(a + 10.0))
    };
    riccati_ode_blowups(a, drift, horizon, 1)
        .first()
        .copied()
        .ok_or_else(|| Error::numerical(format!("no blow-up before x = {horizon} for a = {a}")))
}
