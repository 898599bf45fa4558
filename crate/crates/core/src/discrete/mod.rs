//! Discrete semigroups: Poisson and binomial laws, the M/M/∞ queue and the
//! hypercube.
//!
//! The M/M/∞ queue with arrival rate `λ` and service rate `μ` started at `n`
//! has law `B(n, p) ⋆ Poisson(ρ q)` at time `t`, where `p = e^{−μt}`,
//! `q = 1 − p` and `ρ = λ/μ`.

mod queue;
mod talagrand;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::{log_factorial, phi_theta, LogSum};

pub use queue::{
    check_combination_bound, check_mm_semilogconvexity, check_preservation, ln_mm_transition, mm_apply, mm_law,
    mm_transition, semilogconvex_bound, CombinationReport, MmKernel, PreservationReport, Property,
    SemiLogConvexReport,
};
pub use talagrand::{
    hypercube_kernel, hypercube_sup, ln_mm_sup_semigroup, mm_sup_semigroup, mm_talagrand_tail, optimality_witness,
    psi_s, psi_s_auto, psi_s_bruteforce, OptimalityWitness, PsiValue, TalagrandTail,
};

/// Parameters of the M/M/∞ queue observed at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MMParams {
    pub lambda: f64,
    pub mu: f64,
    pub t: f64,
}

impl MMParams {
    pub fn new(lambda: f64, mu: f64, t: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(mu > 0.0) || !(t >= 0.0) || !t.is_finite() {
            return Err(domain(format!("MMParams(λ={lambda}, μ={mu}, t={t})")));
        }
        Ok(MMParams { lambda, mu, t })
    }

    /// Unit service rate with `ρ = rho`.
    pub fn with_rho(rho: f64, t: f64) -> Result<Self> {
        Self::new(rho, 1.0, t)
    }

    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }

    pub fn p(&self) -> f64 {
        (-self.mu * self.t).exp()
    }

    pub fn q(&self) -> f64 {
        -(-self.mu * self.t).exp_m1()
    }
}

/// Probability mass function on `{0, …, len−1}` with the mass left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfTable {
    pub values: Vec<f64>,
    pub truncation_mass: f64,
}

impl PmfTable {
    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>()
    }
}

/// Declared growth `|f(k)| ≤ bound · e^{rate·k}` used to bound truncated sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub bound: f64,
    pub rate: f64,
}

#[derive(Clone)]
enum Repr {
    Linear(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
    Log(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

/// A function on `ℕ` with either a finite support or a growth declaration.
#[derive(Clone)]
pub struct FuncOnN {
    repr: Repr,
    support: Option<u64>,
    growth: Growth,
}

impl fmt::Debug for FuncOnN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FuncOnN").field("support", &self.support).field("growth", &self.growth).finish()
    }
}

impl FuncOnN {
    /// `f` with `|f(k)| ≤ bound · e^{rate·k}`.
    pub fn new(f: impl Fn(u64) -> f64 + Send + Sync + 'static, bound: f64, rate: f64) -> Self {
        FuncOnN { repr: Repr::Linear(Arc::new(f)), support: None, growth: Growth { bound, rate } }
    }

    /// `f = exp(ln_f)` with `f(k) ≤ bound · e^{rate·k}`.
    pub fn from_log(ln_f: impl Fn(u64) -> f64 + Send + Sync + 'static, bound: f64, rate: f64) -> Self {
        FuncOnN { repr: Repr::Log(Arc::new(ln_f)), support: None, growth: Growth { bound, rate } }
    }

    /// `f` vanishing beyond `max_k`.
    pub fn with_support(f: impl Fn(u64) -> f64 + Send + Sync + 'static, max_k: u64) -> Self {
        FuncOnN {
            repr: Repr::Linear(Arc::new(f)),
            support: Some(max_k),
            growth: Growth { bound: 0.0, rate: 0.0 },
        }
    }

    /// Indicator of `{k}`.
    pub fn indicator(k: u64) -> Self {
        Self::with_support(move |j| if j == k { 1.0 } else { 0.0 }, k)
    }

    /// `e^{λk}`.
    pub fn log_linear(lambda: f64) -> Self {
        Self::from_log(move |k| lambda * k as f64, 1.0, lambda)
    }

    pub fn support(&self) -> Option<u64> {
        self.support
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn eval(&self, k: u64) -> f64 {
        if self.support.is_some_and(|m| k > m) {
            return 0.0;
        }
        match &self.repr {
            Repr::Linear(f) => f(k),
            Repr::Log(f) => f(k).exp(),
        }
    }

    /// `ln f(k)`; `−∞` where `f` vanishes and NaN where it is negative.
    pub fn ln_eval(&self, k: u64) -> f64 {
        if self.support.is_some_and(|m| k > m) {
            return f64::NEG_INFINITY;
        }
        match &self.repr {
            Repr::Linear(f) => {
                let v = f(k);
                if v < 0.0 {
                    f64::NAN
                } else {
                    v.ln()
                }
            }
            Repr::Log(f) => f(k),
        }
    }

    /// Upper bound on `ln Σ_{k>K} f(k) w(k)` where `w` is the law of
    /// `Y + Z` with `Y ≤ shift` and `Z ~ Poisson(theta)`.
    pub(crate) fn ln_tail_bound(&self, k_max: u64, shift: u64, theta: f64) -> f64 {
        if self.support.is_some_and(|m| m <= k_max) {
            return f64::NEG_INFINITY;
        }
        if k_max < shift {
            return f64::INFINITY;
        }
        let Growth { bound, rate } = self.growth;
        if !(bound >= 0.0) || !rate.is_finite() {
            return f64::INFINITY;
        }
        if bound == 0.0 {
            return f64::NEG_INFINITY;
        }
        let tilted = theta * rate.exp();
        bound.ln()
            + rate.max(0.0) * shift as f64
            + theta * rate.exp_m1()
            + ln_poisson_tail(tilted, k_max - shift + 1)
    }
}

/// `ln π_θ(k)`, allowing `θ = 0` (point mass at zero).
pub fn ln_poisson_pmf(theta: f64, k: u64) -> f64 {
    if theta == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -theta + k as f64 * theta.ln() - log_factorial(k)
}

/// `ln(π_θ(k+1)/π_θ(k)) = ln(θ/(k+1))`.
pub fn ln_poisson_ratio(theta: f64, k: u64) -> f64 {
    (theta / (k + 1) as f64).ln()
}

/// `Δ log π_θ(n)` from consecutive ratios.
///
/// Differencing `ln π_θ` directly loses about `n ln n` ulps of absolute
/// accuracy; the ratios keep the result at machine precision.
pub fn poisson_delta_log(theta: f64, n: u64) -> Result<f64> {
    if n == 0 || !(theta > 0.0) {
        return Err(domain(format!("poisson_delta_log(θ={theta}, n={n})")));
    }
    Ok(ln_poisson_ratio(theta, n) - ln_poisson_ratio(theta, n - 1))
}

/// `π_θ(k) = e^{−θ} θ^k / k!`.
pub fn poisson_pmf(theta: f64, k: u64) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(domain(format!("poisson_pmf with θ = {theta}")));
    }
    Ok(ln_poisson_pmf(theta, k).exp())
}

/// `ln π_θ([u, ∞))`.
pub fn ln_poisson_tail(theta: f64, u: u64) -> f64 {
    if u == 0 {
        return 0.0;
    }
    if theta == 0.0 {
        return f64::NEG_INFINITY;
    }
    if (u as f64) <= theta {
        let mut s = LogSum::default();
        for k in 0..u {
            s.add(ln_poisson_pmf(theta, k));
        }
        let cdf = s.value().exp();
        return (-cdf).ln_1p();
    }
    let mut s = LogSum::default();
    let mut lt = ln_poisson_pmf(theta, u);
    let mut k = u;
    loop {
        s.add(lt);
        let r = theta / (k + 1) as f64;
        let next = lt + r.ln();
        // remaining terms are dominated by a geometric series with ratio r
        if next - (-r).ln_1p() < s.value() - 41.0 || next == f64::NEG_INFINITY {
            break;
        }
        lt = next;
        k += 1;
    }
    s.value()
}

/// Exact Poisson tail with the envelope `(2/√u) e^{−Φ_θ(u)}` valid for
/// `u ≥ max(1, 2θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonTail {
    pub exact: f64,
    pub ln_exact: f64,
    pub bound: Option<f64>,
}

pub fn poisson_tail(theta: f64, u: u64) -> Result<PoissonTail> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(domain(format!("poisson_tail with θ = {theta}")));
    }
    let ln_exact = ln_poisson_tail(theta, u);
    let bound = if u >= 1 && u as f64 >= 2.0 * theta {
        Some(2.0 / (u as f64).sqrt() * (-phi_theta(theta, u as f64)?).exp())
    } else {
        None
    };
    Ok(PoissonTail { exact: ln_exact.exp(), ln_exact, bound })
}

/// `ln P(B(k, p) = i)`.
pub fn ln_binomial_pmf(k: u64, p: f64, i: u64) -> f64 {
    if i > k {
        return f64::NEG_INFINITY;
    }
    if p == 0.0 {
        return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if i == k { 0.0 } else { f64::NEG_INFINITY };
    }
    log_factorial(k) - log_factorial(i) - log_factorial(k - i) + i as f64 * p.ln() + (k - i) as f64 * (-p).ln_1p()
}

pub fn binomial_pmf(k: u64, p: f64, i: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("binomial_pmf with p = {p}")));
    }
    Ok(ln_binomial_pmf(k, p, i).exp())
}

/// A mode of `B(k, p)`: `⌊(k+1)p⌋`, capped at `k`.
pub fn binomial_mode(k: u64, p: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("binomial_mode with p = {p}")));
    }
    Ok((((k + 1) as f64 * p).floor() as u64).min(k))
}

/// `Δf(n) = f(n+1) + f(n−1) − 2f(n)` for `n ≥ 1`.
pub fn discrete_laplacian(f: &FuncOnN, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("discrete Laplacian needs n ≥ 1"));
    }
    Ok(f.eval(n + 1) + f.eval(n - 1) - 2.0 * f.eval(n))
}

/// `Δ log f(n)` for `f > 0` near `n ≥ 1`.
pub fn delta_log(f: &FuncOnN, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("Δ log needs n ≥ 1"));
    }
    let (a, b, c) = (f.ln_eval(n + 1), f.ln_eval(n), f.ln_eval(n - 1));
    if ![a, b, c].iter().all(|v| v.is_finite()) {
        return Err(domain(format!("Δ log f({n}) needs f > 0 at n−1, n, n+1")));
    }
    Ok(a + c - 2.0 * b)
}

/// Second difference of a log-sequence at interior index `n`.
pub(crate) fn second_difference(ln_values: &[f64], n: usize) -> f64 {
    ln_values[n + 1] + ln_values[n - 1] - 2.0 * ln_values[n]
}
