//! Special functions and scalar numerics shared by the semigroup modules.
//!
//! | item                              | notes                                          |
//! |-----------------------------------|------------------------------------------------|
//! | [`hermite`]                       | probabilists' convention, degree ≤ 64          |
//! | [`bessel_i`], [`ln_bessel_i`]     | modified Bessel `I_ν`, log-scaled              |
//! | [`log_factorial`], [`ln_gamma`]   | exact product for `n ≤ 20`                     |
//! | [`digamma`]                       | recurrence plus asymptotic series              |
//! | [`phi_theta`], [`h_crit`]         | Poisson rate functions and their inverses      |
//! | [`alpha_integral`]                | `∫₀ᵗ (sinh(a(t−s))/sinh(at))² ds`              |
//! | [`gamma_q`]                       | regularized upper incomplete Gamma             |

mod bessel;
pub mod quad;
pub mod roots;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use bessel::{bessel_i, ln_bessel_i};

/// Tolerances and iteration caps for series and adaptive routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for Accuracy {
    fn default() -> Self {
        Accuracy { rel_tol: 1e-15, abs_tol: 0.0, max_terms: 100_000 }
    }
}

impl Accuracy {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Accuracy { rel_tol, ..Accuracy::default() }
    }
}

/// Named constants measured from fits. Reported, never assumed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateConstants(pub BTreeMap<String, f64>);

impl RateConstants {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.0.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn extend(&mut self, other: &RateConstants) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), *v);
        }
    }
}

pub const MAX_HERMITE_DEGREE: usize = 64;

/// Probabilists' Hermite polynomial `H_n(x)`, with `H_{n+1} = x H_n − n H_{n−1}`.
pub fn hermite(n: usize, x: f64) -> Result<f64> {
    if n > MAX_HERMITE_DEGREE {
        return Err(Error::UnsupportedDegree { degree: n, max: MAX_HERMITE_DEGREE });
    }
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return Ok(prev);
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    libm::lgamma(x)
}

/// `ln n!`. Exact integer product for `n ≤ 20`.
pub fn log_factorial(n: u64) -> f64 {
    if n <= 20 {
        let p: u64 = (1..=n).product();
        (p as f64).ln()
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Logs of the Stirling envelope `n^{n+½} e^{−n} ≤ n! ≤ 3 n^{n+½} e^{−n}`:
/// returns `(lower, ln n!, upper)`.
pub fn stirling_envelope(n: u64) -> (f64, f64, f64) {
    let nf = n as f64;
    let lower = (nf + 0.5) * nf.ln() - nf;
    (lower, log_factorial(n), lower + 3f64.ln())
}

/// Digamma `ψ(x) = Γ'(x)/Γ(x)`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(format!("digamma at {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(domain(format!("digamma pole at {x}")));
    }
    if x < 0.0 {
        let pi = std::f64::consts::PI;
        return Ok(digamma(1.0 - x)? - pi / (pi * x).tan());
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    Ok(acc + y.ln() - 0.5 / y - series)
}

/// Poisson rate function `Φ_θ(x) = x ln x − x ln θ − x + θ`.
pub fn phi_theta(theta: f64, x: f64) -> Result<f64> {
    if !(theta > 0.0) || !(x >= 0.0) {
        return Err(domain(format!("phi_theta(θ={theta}, x={x})")));
    }
    if x == 0.0 {
        return Ok(theta);
    }
    Ok(x * x.ln() - x * theta.ln() - x + theta)
}

/// Inverse of `Φ_θ` on the increasing branch `x ≥ max(1, θ)`.
pub fn phi_theta_inverse(theta: f64, y: f64) -> Result<f64> {
    let lo = theta.max(1.0);
    let ymin = phi_theta(theta, lo)?;
    if !(y >= ymin) || !y.is_finite() {
        return Err(domain(format!("phi_theta_inverse: y = {y} below branch minimum {ymin}")));
    }
    roots::invert_increasing(|x| x * x.ln() - x * theta.ln() - x + theta, lo, y, 1e-12)
}

/// `H(x) = x ln x − x`.
pub fn h_crit(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain(format!("h_crit at {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(x * x.ln() - x)
}

/// Inverse of `H` on `[1, ∞)`, defined for `y ≥ −1`.
pub fn h_crit_inverse(y: f64) -> Result<f64> {
    if !(y >= -1.0) || !y.is_finite() {
        return Err(domain(format!("h_crit_inverse: y = {y} < -1")));
    }
    roots::invert_increasing(|x| x * x.ln() - x, 1.0, y, 1e-12)
}

/// `∫₀ᵗ (sinh(a(t−s))/sinh(at))² ds`, bounded by `1/(2a)`.
pub fn alpha_integral(a: f64, t: f64) -> Result<f64> {
    if !(a > 0.0) || !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("alpha_integral(a={a}, t={t})")));
    }
    Ok(alpha_integral_unit(a * t) / a)
}

fn alpha_integral_unit(tau: f64) -> f64 {
    if tau < 0.5 {
        // (sinh 2τ − 2τ) / (4 sinh² τ), numerator summed as a series
        let u = 2.0 * tau;
        let u2 = u * u;
        let mut term = u * u2 / 6.0;
        let mut num = term;
        let mut k = 1.0;
        while term > 1e-18 * num {
            term *= u2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            num += term;
            k += 1.0;
        }
        let s = tau.sinh();
        num / (4.0 * s * s)
    } else {
        let s = tau.sinh();
        0.5 / tau.tanh() - tau / (2.0 * s * s)
    }
}

/// Regularized upper incomplete Gamma `Q(a, x) = Γ(a, x)/Γ(a)`.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(domain(format!("gamma_q(a={a}, x={x})")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let log_pref = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut sum = 1.0 / a;
        let mut term = sum;
        let mut n = 1.0;
        while term.abs() > sum.abs() * 1e-17 {
            term *= x / (a + n);
            sum += term;
            n += 1.0;
            if n > 1e6 {
                return Err(Error::Accuracy("gamma_q series".into()));
            }
        }
        Ok(1.0 - (log_pref + sum.ln()).exp())
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut i = 1.0;
        loop {
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
            i += 1.0;
            if i > 1e6 {
                return Err(Error::Accuracy("gamma_q continued fraction".into()));
            }
        }
        Ok((log_pref + h.ln()).exp())
    }
}

/// `ln Σ exp(v)` over finite entries; `−∞` for an empty or all-`−∞` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Streaming `ln Σ exp`.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum { max: f64::NEG_INFINITY, scaled: 0.0 }
    }
}

impl LogSum {
    pub fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.scaled += (v - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
