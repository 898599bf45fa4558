//! Measured tail probabilities against an envelope.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::specfun::roots::bisect_secant;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub t: Vec<f64>,
    pub tail: Vec<f64>,
    pub bound: Vec<f64>,
}

impl TailCurve {
    pub fn push(&mut self, t: f64, tail: f64, bound: f64) {
        self.t.push(t);
        self.tail.push(tail);
        self.bound.push(bound);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `tail / bound` pointwise.
    pub fn ratio(&self) -> Vec<f64> {
        self.tail.iter().zip(&self.bound).map(|(a, b)| a / b).collect()
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratio().into_iter().fold(0.0, f64::max)
    }

    /// Indices where the measured tail exceeds `(1 + rel_slack) · bound`.
    pub fn violations(&self, rel_slack: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.tail[i] > self.bound[i] * (1.0 + rel_slack)).collect()
    }
}

/// Union of intervals where `values ≥ level` on `grid`, with edges refined
/// by root finding on `ln_f` and unbounded ends where the set touches the
/// edge of the grid.
pub fn superlevel_intervals(
    ln_f: &dyn Fn(f64) -> f64,
    grid: &[f64],
    values: &[f64],
    level: f64,
) -> Result<Vec<(f64, f64)>> {
    let inside: Vec<bool> = values.iter().map(|&v| v >= level).collect();
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    if inside[0] {
        start = Some(f64::NEG_INFINITY);
    }
    for i in 1..grid.len() {
        if inside[i] != inside[i - 1] {
            let edge = bisect_secant(|x| ln_f(x) - level, grid[i - 1], grid[i], 1e-14)?;
            if inside[i] {
                start = Some(edge);
            } else {
                out.push((start.take().expect("open interval"), edge));
            }
        }
    }
    if let Some(s) = start {
        out.push((s, f64::INFINITY));
    }
    Ok(out)
}

/// `√(ln ln t) / (t √(ln t))`.
pub fn loglog_envelope(t: f64) -> f64 {
    let l = t.ln();
    l.ln().sqrt() / (t * l.sqrt())
}

/// `1 / (t √(ln t))`.
pub fn log_envelope(t: f64) -> f64 {
    1.0 / (t * t.ln().sqrt())
}

/// Grid of `count` points from `start` to `stop`, linear or logarithmic.
pub fn grid(start: f64, stop: f64, count: usize, log: bool) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| {
            let u = i as f64 / (count - 1) as f64;
            if i == count - 1 {
                stop
            } else if log {
                (start.ln() + u * (stop.ln() - start.ln())).exp()
            } else {
                start + u * (stop - start)
            }
        })
        .collect()
}
