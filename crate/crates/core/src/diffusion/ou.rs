//! Mehler quadrature, log-derivatives and exact path sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::OUParams;
use crate::error::{domain, Error, Result};
use crate::specfun::{hermite, quad::GaussHermite};

/// A quadrature value with the change observed when the order is raised by half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: f64,
    pub delta: f64,
}

impl QuadratureValue {
    /// True when raising the order moved the value by more than `1e−8` relative.
    pub fn warning(&self) -> bool {
        self.delta > 1e-8 * self.value.abs().max(1e-300)
    }
}

fn mehler_at_order(params: &OUParams, g: &dyn Fn(&[f64]) -> f64, t: f64, x: &[f64], order: usize) -> Result<f64> {
    let gh = GaussHermite::new(order)?;
    let m = params.decay(t);
    let sd = params.variance(t).sqrt();
    match params.dim {
        1 => Ok(gh.expect(|y| g(&[m * x[0] + sd * y]))),
        2 => {
            let mut acc = 0.0;
            for (&y1, &w1) in gh.nodes.iter().zip(&gh.weights) {
                for (&y2, &w2) in gh.nodes.iter().zip(&gh.weights) {
                    acc += w1 * w2 * g(&[m * x[0] + sd * y1, m * x[1] + sd * y2]);
                }
            }
            Ok(acc)
        }
        d => Err(Error::Unsupported(format!("Mehler quadrature in dimension {d}"))),
    }
}

/// `P_t g(x) = E g(e^{−at}x + √v_t Y)` by (tensor) Gauss–Hermite quadrature.
pub fn ou_mehler_apply(
    params: &OUParams,
    g: &dyn Fn(&[f64]) -> f64,
    t: f64,
    x: &[f64],
    quad_order: usize,
) -> Result<QuadratureValue> {
    params.check_time(t)?;
    if x.len() != params.dim {
        return Err(domain("point dimension does not match the diffusion"));
    }
    let value = mehler_at_order(params, g, t, x, quad_order)?;
    let finer = mehler_at_order(params, g, t, x, (quad_order * 3).div_ceil(2).min(400))?;
    Ok(QuadratureValue { value, delta: (finer - value).abs() })
}

/// First two derivatives of `u_t = ln P_t g` in dimension one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDerivatives {
    pub u1: f64,
    pub u2: f64,
    /// `c_t`; the second derivative is bounded below by `−c_t²`.
    pub c_t: f64,
    /// Tilted mean and variance of the Gaussian variable.
    pub tilted_mean: f64,
    pub tilted_var: f64,
}

/// `u' = c_t E_x[H₁(Y)]`, `u'' = c_t²(E_x[H₂(Y)] − E_x[H₁(Y)]²)` where
/// `E_x` tilts `Y ~ N(0,1)` by `g(e^{−at}x + √v_t Y)`.
pub fn ou_log_derivative(
    params: &OUParams,
    g: &dyn Fn(f64) -> f64,
    t: f64,
    x: f64,
    quad_order: usize,
) -> Result<LogDerivatives> {
    params.check_time(t)?;
    if params.dim != 1 {
        return Err(Error::Unsupported("log-derivatives are one-dimensional".into()));
    }
    let gh = GaussHermite::new(quad_order)?;
    let m = params.decay(t) * x;
    let sd = params.variance(t).sqrt();
    let weights: Vec<f64> = gh.nodes.iter().zip(&gh.weights).map(|(&y, &w)| w * g(m + sd * y)).collect();
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(domain("g must be finite and non-negative"));
    }
    let z: f64 = weights.iter().sum();
    if !(z > 0.0) {
        return Err(Error::Degenerate("P_t g(x) vanishes".into()));
    }
    let mut e1 = 0.0;
    let mut e2 = 0.0;
    for (&y, &w) in gh.nodes.iter().zip(&weights) {
        e1 += w * hermite(1, y)?;
        e2 += w * hermite(2, y)?;
    }
    e1 /= z;
    e2 /= z;
    let var: f64 = gh.nodes.iter().zip(&weights).map(|(&y, &w)| w * (y - e1) * (y - e1)).sum::<f64>() / z;
    let c = params.c_t(t);
    Ok(LogDerivatives { u1: c * e1, u2: c * c * (e2 - e1 * e1), c_t: c, tilted_mean: e1, tilted_var: var })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("time grid must start at s ≥ 0 and increase strictly"));
    }
    Ok(())
}

/// OU path at the times in `time_grid` from exact Gaussian transitions.
/// Row `j` is the state at `time_grid[j]`; the path starts at `x` at time 0.
pub fn sample_ou_path(params: &OUParams, x: &[f64], time_grid: &[f64], seed: u64) -> Result<Vec<Vec<f64>>> {
    check_grid(time_grid)?;
    if x.len() != params.dim {
        return Err(domain("point dimension does not match the diffusion"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = x.to_vec();
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(time_grid.len());
    for &s in time_grid {
        let dt = s - prev;
        if dt > 0.0 {
            let m = params.decay(dt);
            let sd = params.variance(dt).sqrt();
            for v in state.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = m * *v + sd * z;
            }
        }
        out.push(state.clone());
        prev = s;
    }
    Ok(out)
}

/// Bridge from `x` at time 0 to `y` at time `t`, sampled at `time_grid ⊂ [0, t)`
/// with the terminal state `y` appended.
///
/// `Z_s = α_t(s) x + (sinh(as)/sinh(at)) y + σ sinh(a(t−s)) M_s` where `M`
/// is a Gaussian martingale with `d⟨M⟩_r = dr / sinh²(a(t−r))`, sampled
/// exactly from its independent increments. The noise does not depend on
/// `x`, so paths sharing a seed differ by exactly `α_t(s)(x − x')`.
pub fn sample_ou_bridge(
    params: &OUParams,
    x: &[f64],
    y: &[f64],
    t: f64,
    time_grid: &[f64],
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    params.check_time(t)?;
    check_grid(time_grid)?;
    if time_grid.last().is_some_and(|&s| s >= t) {
        return Err(domain("bridge grid must lie in [0, t)"));
    }
    if x.len() != params.dim || y.len() != params.dim {
        return Err(domain("point dimension does not match the diffusion"));
    }
    let a = params.a;
    if a * t > 300.0 {
        return Err(domain("a·t too large for the bridge representation"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m_state = vec![0.0; params.dim];
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(time_grid.len() + 1);
    for &s in time_grid {
        if s > prev {
            let inc_var = (a * (s - prev)).sinh() / ((a * (t - prev)).sinh() * (a * (t - s)).sinh()) / a;
            let sd = inc_var.sqrt();
            for v in m_state.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += sd * z;
            }
        }
        let alpha = params.alpha(t, s);
        let beta = params.alpha(t, t - s);
        let scale = params.sigma * (a * (t - s)).sinh();
        out.push((0..params.dim).map(|i| alpha * x[i] + beta * y[i] + scale * m_state[i]).collect());
        prev = s;
    }
    out.push(y.to_vec());
    Ok(out)
}
