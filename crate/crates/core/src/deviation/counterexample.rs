//! Gaussian-shaped normalized functions `f_a(n) = exp(−β(n − a)²/2 + Z(a))`
//! whose Poisson tails stay of Markov order.

use serde::{Deserialize, Serialize};

use crate::discrete::ln_poisson_pmf;
use crate::error::{domain, Error, Result};
use crate::specfun::roots::bisect_secant;
use crate::specfun::{digamma, ln_gamma, LogSum};

/// `Ψ_a(u) = −β(u − a)²/2 − ln Γ(u + 1) + u ln θ − θ`.
pub fn psi_a(theta: f64, beta: f64, a: f64, u: f64) -> f64 {
    -0.5 * beta * (u - a) * (u - a) - ln_gamma(u + 1.0) + u * theta.ln() - theta
}

fn psi_a_prime(theta: f64, beta: f64, a: f64, u: f64) -> Result<f64> {
    Ok(-beta * (u - a) - digamma(u + 1.0)? + theta.ln())
}

/// Maximizer of `Ψ_a` on `[0, ∞)`.
pub fn u_a(theta: f64, beta: f64, a: f64) -> Result<f64> {
    if psi_a_prime(theta, beta, a, 0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = a.max(1.0);
    while psi_a_prime(theta, beta, a, hi)? > 0.0 {
        hi *= 2.0;
    }
    bisect_secant(|u| psi_a_prime(theta, beta, a, u).unwrap_or(f64::NAN), 0.0, hi, 1e-14)
}

/// `ln Σ_n exp(−β(n − a)²/2) π_θ(n)`, the negative of `Z(a)`.
fn ln_gauss_mass(theta: f64, beta: f64, a: f64) -> f64 {
    let spread = 40.0 / beta.sqrt() + 10.0 * theta.sqrt() + 50.0;
    let hi = (a.max(theta) + spread).ceil() as u64;
    let mut s = LogSum::default();
    for n in 0..=hi {
        let d = n as f64 - a;
        s.add(-0.5 * beta * d * d + ln_poisson_pmf(theta, n));
    }
    s.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleHit {
    pub a: f64,
    pub u_a: u64,
    /// `ln T(a) = −β(u_a − a)²/2 + Z(a)`.
    pub ln_t: f64,
    /// `π_θ(f_a ≥ T(a))`.
    pub tail: f64,
    /// `ln(T(a) · tail)`.
    pub ln_product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub theta: f64,
    pub beta: f64,
    /// `c_β = −ln(2 Σ_{n≥0} e^{−βn²/2})`.
    pub c_beta: f64,
    pub hits: Vec<CounterexampleHit>,
    /// `min ln(T·tail) − c_β` over the hits.
    pub min_excess: f64,
    /// `T(a)` strictly increases over the last five hits.
    pub t_increasing: bool,
}

fn c_beta(beta: f64) -> f64 {
    let mut s = 0.0;
    let mut n = 0.0_f64;
    loop {
        let term = (-0.5 * beta * n * n).exp();
        s += term;
        if term < 1e-18 * s {
            break;
        }
        n += 1.0;
    }
    -(2.0 * s).ln()
}

/// Scans `a ∈ [a_lo, a_hi]` on a grid of spacing `step`, locates the
/// values where `u_a` crosses an integer, refines them by bisection and
/// evaluates `T(a) · π_θ(f_a ≥ T(a))` at each.
pub fn poisson_counterexample(theta: f64, beta: f64, a_range: (f64, f64), step: f64) -> Result<CounterexampleReport> {
    if !(beta > 0.0) || !(theta > 0.0) {
        return Err(domain("counterexample needs β > 0 and θ > 0"));
    }
    let (lo, hi) = a_range;
    if !(lo < hi) || !(step > 0.0) {
        return Err(domain("empty search range"));
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let mut hits = Vec::new();
    let mut prev_a = lo;
    let mut prev_u = u_a(theta, beta, lo)?;
    for i in 1..=n {
        let a = (lo + step * i as f64).min(hi);
        let u = u_a(theta, beta, a)?;
        let m = u.floor();
        if m > prev_u.floor() && m >= 1.0 {
            let target = m;
            let ac = bisect_secant(|x| u_a(theta, beta, x).unwrap_or(f64::NAN) - target, prev_a, a, 1e-14)?;
            hits.push(evaluate_hit(theta, beta, ac, target as u64));
        }
        prev_a = a;
        prev_u = u;
    }
    if hits.is_empty() {
        return Err(Error::SearchRange(format!("no integer crossing of u_a for a ∈ [{lo}, {hi}]")));
    }
    let cb = c_beta(beta);
    let min_excess = hits.iter().map(|h| h.ln_product - cb).fold(f64::INFINITY, f64::min);
    let last: Vec<f64> = hits.iter().rev().take(5).map(|h| h.ln_t).collect();
    let t_increasing = last.len() == 5 && last.windows(2).all(|w| w[0] > w[1]);
    Ok(CounterexampleReport { theta, beta, c_beta: cb, hits, min_excess, t_increasing })
}

fn evaluate_hit(theta: f64, beta: f64, a: f64, m: u64) -> CounterexampleHit {
    let z = -ln_gauss_mass(theta, beta, a);
    let dm = m as f64 - a;
    let ln_t = -0.5 * beta * dm * dm + z;
    // f_a(n) ≥ T(a) ⇔ |n − a| ≤ |m − a|; the slack keeps n = m inside.
    let r = dm.abs() * (1.0 + 1e-12) + 1e-12;
    let first = (a - r).ceil().max(0.0) as u64;
    let last = (a + r).floor() as u64;
    let mut tail = LogSum::default();
    for k in first..=last {
        tail.add(ln_poisson_pmf(theta, k));
    }
    let ln_tail = tail.value();
    CounterexampleHit { a, u_a: m, ln_t, tail: ln_tail.exp(), ln_product: ln_t + ln_tail }
}
