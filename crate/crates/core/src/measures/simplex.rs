//! Dense bounded-variable primal simplex for
//!
//! ```text
//! maximize cᵀx  subject to  A x = 0,  l ≤ x ≤ u,
//! ```
//!
//! started from a feasible basis whose columns of A form the identity.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-12;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Basic(usize),
    Lower,
    Upper,
}

pub(crate) struct BoundedLp {
    rows: usize,
    cols: usize,
    /// Row-major B⁻¹A.
    tableau: Vec<f64>,
    reduced: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    cost: Vec<f64>,
}

impl BoundedLp {
    /// `a` is row-major `rows × cols`; `basis[i]` is the column holding the
    /// unit vector e_i. Nonbasic variables start at their lower bound and
    /// the resulting basic values must lie within bounds.
    pub(crate) fn new(
        rows: usize,
        cols: usize,
        a: Vec<f64>,
        cost: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        basis: Vec<usize>,
    ) -> Result<Self> {
        let mut status = vec![Status::Lower; cols];
        for (i, &b) in basis.iter().enumerate() {
            status[b] = Status::Basic(i);
        }
        let mut x: Vec<f64> = lower.clone();
        for i in 0..rows {
            let row = &a[i * cols..(i + 1) * cols];
            let mut v = 0.0;
            for j in 0..cols {
                if !matches!(status[j], Status::Basic(_)) {
                    v -= row[j] * x[j];
                }
            }
            let b = basis[i];
            if v < lower[b] - 1e-12 || v > upper[b] + 1e-12 {
                return Err(Error::numerical("initial basis is infeasible"));
            }
            x[b] = v.clamp(lower[b], upper[b]);
        }
        let mut reduced = cost.clone();
        for i in 0..rows {
            let cb = cost[basis[i]];
            if cb != 0.0 {
                for j in 0..cols {
                    reduced[j] -= cb * a[i * cols + j];
                }
            }
        }
        Ok(BoundedLp {
            rows,
            cols,
            tableau: a,
            reduced,
            lower,
            upper,
            x,
            basis,
            status,
            cost,
        })
    }

    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            let d = self.reduced[j];
            let dir = match self.status[j] {
                Status::Basic(_) => continue,
                Status::Lower if d > COST_TOL && self.upper[j] > self.lower[j] => 1.0,
                Status::Upper if d < -COST_TOL && self.upper[j] > self.lower[j] => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(b, _)| d.abs() > self.reduced[b].abs()) {
                best = Some((j, dir));
            }
        }
        best
    }

    /// Runs to optimality and returns the optimal objective value.
    pub(crate) fn solve(&mut self) -> Result<f64> {
        let max_iter = 50 * (self.rows + self.cols) + 1000;
        let mut degenerate = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_LIMIT;
            let Some((q, dir)) = self.entering(bland) else {
                return Ok(self.objective());
            };
            // ratio test; `None` row means the entering variable flips bound
            let mut step = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..self.rows {
                let t = self.tableau[i * self.cols + q];
                if t.abs() < PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let rate = -dir * t;
                let (limit, to_upper) = if rate < 0.0 {
                    ((self.x[b] - self.lower[b]) / -rate, false)
                } else {
                    ((self.upper[b] - self.x[b]) / rate, true)
                };
                let limit = limit.max(0.0);
                let replace = match leave {
                    None => limit < step,
                    Some((r, _)) => {
                        limit < step - 1e-15 || (bland && limit <= step + 1e-15 && b < self.basis[r])
                    }
                };
                if replace {
                    step = limit;
                    leave = Some((i, to_upper));
                }
            }
            if !step.is_finite() {
                return Err(Error::numerical("linear program is unbounded"));
            }
            if step <= 1e-15 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for i in 0..self.rows {
                let t = self.tableau[i * self.cols + q];
                if t != 0.0 {
                    let b = self.basis[i];
                    self.x[b] -= dir * step * t;
                }
            }
            self.x[q] += dir * step;
            match leave {
                None => {
                    self.status[q] = if dir > 0.0 { Status::Upper } else { Status::Lower };
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                }
                Some((r, to_upper)) => {
                    let out = self.basis[r];
                    self.x[out] = if to_upper { self.upper[out] } else { self.lower[out] };
                    self.status[out] = if to_upper { Status::Upper } else { Status::Lower };
                    self.pivot(r, q);
                }
            }
        }
        Err(Error::numerical("simplex iteration limit reached"))
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.tableau[r * cols + q];
        for v in &mut self.tableau[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let pivot_row: Vec<(usize, f64)> = self.tableau[r * cols..(r + 1) * cols]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.tableau[i * cols + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tableau[i * cols..(i + 1) * cols];
            for &(j, v) in &pivot_row {
                row[j] -= f * v;
            }
            row[q] = 0.0;
        }
        let f = self.reduced[q];
        for &(j, v) in &pivot_row {
            self.reduced[j] -= f * v;
        }
        self.reduced[q] = 0.0;
        self.basis[r] = q;
        self.status[q] = Status::Basic(r);
    }

    pub(crate) fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    pub(crate) fn solution(&self) -> &[f64] {
        &self.x
    }
}
