//! `Ψ_s`, the supremum of the M/M/∞ semigroup over normalized functions,
//! and the resulting Talagrand-type tails. Here `ρ = μ = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ln_binomial_pmf, ln_poisson_pmf, ln_poisson_tail};
use crate::error::{domain, Error, Result};
use crate::specfun::{h_crit_inverse, log_factorial, roots::bisect_secant};
use crate::tail::{loglog_envelope, TailCurve};

/// `ln P(X_s = n | X_0 = k)` by summing the unimodal convolution outward
/// from its mode.
fn ln_p_n_given_k(p: f64, q: f64, n: u64, k: u64) -> f64 {
    let j_lo = n.saturating_sub(k);
    let j_hi = n;
    let ratio = |j: u64| -> f64 {
        // T_{j+1}/T_j with T_j = B(k,p)(n−j) · Poisson(q)(j)
        (n - j) as f64 * q * q / (((k + j + 1 - n) as f64) * p * (j + 1) as f64)
    };
    let ln_term = |j: u64| ln_binomial_pmf(k, p, n - j) + ln_poisson_pmf(q, j);
    // first j with ratio(j) < 1; ratio is decreasing and ratio(j_hi) = 0
    let (mut a, mut b) = (j_lo, j_hi);
    while a < b {
        let m = a + (b - a) / 2;
        if ratio(m) < 1.0 {
            b = m;
        } else {
            a = m + 1;
        }
    }
    let mode = a;
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut j = mode;
    while j < j_hi {
        term *= ratio(j);
        sum += term;
        j += 1;
        if term < 1e-18 * sum {
            break;
        }
    }
    term = 1.0;
    j = mode;
    while j > j_lo {
        term /= ratio(j - 1);
        sum += term;
        j -= 1;
        if term < 1e-18 * sum {
            break;
        }
    }
    ln_term(mode) + sum.ln()
}

/// `ln P(B(k,p) + Z ≥ n)`, `Z ~ Poisson(q)`, by a Chernoff bound.
fn ln_upper_tail_bound(p: f64, q: f64, n: u64, k: u64) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    if kf * p + q >= nf {
        return 0.0;
    }
    let g = |u: f64| kf * p * u / (1.0 - p + p * u) + q * u - nf;
    let mut hi = 2.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let u = bisect_secant(g, 1.0, hi, 1e-12).unwrap_or(hi);
    (kf * (1.0 - p + p * u).ln() + q * (u - 1.0) - nf * u.ln()).min(0.0)
}

/// `ln P(B(k,p) ≤ n)` by a Chernoff bound.
fn ln_lower_tail_bound(p: f64, n: u64, k: u64) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    if nf >= kf * p {
        return 0.0;
    }
    let a = nf / kf;
    let kl = if a == 0.0 { -(-p).ln_1p() } else { a * (a / p).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - p)).ln() };
    -kf * kl
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub n: u64,
    pub s: f64,
    pub psi: f64,
    pub ln_psi: f64,
    pub argmax_k: u64,
}

/// `Ψ_s(n) = e · sup_{k ≤ k_max} P(X_s = n | X_0 = k)`.
///
/// Evaluates a window around `k ≈ n e^s` and widens it until Chernoff
/// bounds exclude everything outside. Fails with
/// [`Error::KmaxTooSmall`] if the supremum sits within 10 of `k_max`.
pub fn psi_s(s: f64, n: u64, k_max: u64) -> Result<PsiValue> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(domain(format!("psi_s needs s > 0, got {s}")));
    }
    let p = (-s).exp();
    let q = -(-s).exp_m1();
    let center = ((n as f64 / p).round() as u64).min(k_max);
    let w = (3.0 * ((n as f64) * q + 1.0).sqrt() / p).ceil() as u64 + 8;
    let mut lo = center.saturating_sub(w);
    let mut hi = (center + w).min(k_max);
    let mut best = f64::NEG_INFINITY;
    let mut argmax = lo;
    let visit = |a: u64, b: u64, best: &mut f64, argmax: &mut u64| {
        for k in a..=b {
            let v = ln_p_n_given_k(p, q, n, k);
            if v > *best {
                *best = v;
                *argmax = k;
            }
        }
    };
    visit(lo, hi, &mut best, &mut argmax);
    loop {
        let left_done = lo == 0 || ln_upper_tail_bound(p, q, n, lo - 1) < best;
        let right_done = hi >= k_max || ln_lower_tail_bound(p, n, hi + 1) < best;
        if left_done && right_done {
            break;
        }
        let width = (hi - lo).max(w);
        if !left_done {
            let new_lo = lo.saturating_sub(width);
            visit(new_lo, lo - 1, &mut best, &mut argmax);
            lo = new_lo;
        }
        if !right_done {
            let new_hi = (hi + width).min(k_max);
            visit(hi + 1, new_hi, &mut best, &mut argmax);
            hi = new_hi;
        }
    }
    if k_max >= 10 && argmax + 10 > k_max && hi >= k_max {
        return Err(Error::KmaxTooSmall { n, k_max, argmax });
    }
    if k_max < 10 {
        return Err(Error::KmaxTooSmall { n, k_max, argmax });
    }
    let ln_psi = 1.0 + best;
    Ok(PsiValue { n, s, psi: ln_psi.exp(), ln_psi, argmax_k: argmax })
}

/// [`psi_s`] with `k_max` doubled until the supremum is interior.
pub fn psi_s_auto(s: f64, n: u64) -> Result<PsiValue> {
    let p = (-s).exp();
    let mut k_max = ((4.0 * (n + 1) as f64 / p).ceil() as u64).max(64);
    loop {
        match psi_s(s, n, k_max) {
            Err(Error::KmaxTooSmall { .. }) if k_max < u64::MAX / 4 => k_max *= 2,
            other => return other,
        }
    }
}

/// Brute-force `Ψ_s(n)` scanning every `k ≤ k_max`; slow, for cross-checks.
pub fn psi_s_bruteforce(s: f64, n: u64, k_max: u64) -> f64 {
    let p = (-s).exp();
    let q = -(-s).exp_m1();
    let best = (0..=k_max).map(|k| ln_p_n_given_k(p, q, n, k)).fold(f64::NEG_INFINITY, f64::max);
    (1.0 + best).exp()
}

/// `ln sup_f P_s f(n) = ln(n! Ψ_s(n))` over `f ≥ 0` with `∫ f dπ_1 = 1`.
pub fn ln_mm_sup_semigroup(s: f64, n: u64) -> Result<f64> {
    Ok(log_factorial(n) + psi_s_auto(s, n)?.ln_psi)
}

pub fn mm_sup_semigroup(s: f64, n: u64) -> Result<f64> {
    let v = ln_mm_sup_semigroup(s, n)?.exp();
    if v.is_infinite() {
        return Err(Error::Range(format!("n! Ψ_s(n) overflows at n = {n}")));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TalagrandTail {
    pub s: f64,
    /// Measured `π_1(n!Ψ_s(n) ≥ t)` against `c · √(ln ln t)/(t √(ln t))`
    /// with the fitted `c`.
    pub curve: TailCurve,
    pub fitted_c: f64,
    /// Constant `C` with `√n Ψ_s(n) ≤ C` used in the proof envelope.
    pub c_prep: f64,
    /// `3C/(t √(H⁻¹(ln(t/3C))))` where it applies (`t > 3C`).
    pub proof_bound: Vec<Option<f64>>,
    /// Smallest `n` in `{n!Ψ_s(n) ≥ t}`.
    pub threshold: Vec<u64>,
}

/// `π_1({n : n!Ψ_s(n) ≥ t})` on `t_grid` (all `t > e`).
pub fn mm_talagrand_tail(s: f64, t_grid: &[f64], c_prep: f64) -> Result<TalagrandTail> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > std::f64::consts::E) || !t.is_finite()) {
        return Err(domain("t grid must be finite and above e"));
    }
    if !(c_prep > 0.0) {
        return Err(domain("c_prep must be positive"));
    }
    let p = (-s).exp();
    let q = -(-s).exp_m1();
    let ln_t_max = t_grid.iter().copied().fold(0.0, f64::max).ln();
    // n!Ψ_s(n) ≥ e n! pⁿ e^{−q}, increasing once n p ≥ 1
    let mut big_n = (1.0 / p).ceil() as u64;
    while log_factorial(big_n) + big_n as f64 * p.ln() + 1.0 - q <= ln_t_max {
        big_n += 1;
    }
    let ln_v: Vec<f64> = (0..=big_n)
        .into_par_iter()
        .map(|n| ln_mm_sup_semigroup(s, n))
        .collect::<Result<_>>()?;
    let ln_rest = ln_poisson_tail(1.0, big_n + 1);
    let mut curve = TailCurve::default();
    let mut threshold = Vec::with_capacity(t_grid.len());
    let mut proof_bound = Vec::with_capacity(t_grid.len());
    let mut ratios = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let lt = t.ln();
        let mut tail = ln_rest.exp();
        let mut first = big_n + 1;
        for n in (0..=big_n).rev() {
            if ln_v[n as usize] >= lt {
                tail += ln_poisson_pmf(1.0, n).exp();
                first = n;
            }
        }
        threshold.push(first);
        ratios.push(tail / loglog_envelope(t));
        curve.push(t, tail, 0.0);
        proof_bound.push(if t > 3.0 * c_prep {
            let u = h_crit_inverse((t / (3.0 * c_prep)).ln())?;
            Some(3.0 * c_prep / (t * u.sqrt()))
        } else {
            None
        });
    }
    let fitted_c = ratios.iter().copied().fold(0.0, f64::max);
    for (b, &t) in curve.bound.iter_mut().zip(t_grid) {
        *b = fitted_c * loglog_envelope(t);
    }
    Ok(TalagrandTail { s, curve, fitted_c, c_prep, proof_bound, threshold })
}

/// The family `f_λ(n) = e^{λn} exp(1 − e^λ)` at `λ = ln k`, `t = f_λ(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalityWitness {
    pub k: u64,
    pub t: f64,
    pub tail: f64,
    /// `t √(ln t / ln ln t) · π_1(f_λ ≥ t)`.
    pub lhs: f64,
    /// `(1/3) √(ln t / (k ln ln t))`.
    pub rhs: f64,
}

pub fn optimality_witness(k: u64) -> Result<OptimalityWitness> {
    if k < 3 {
        return Err(domain("optimality witness needs k ≥ 3"));
    }
    let kf = k as f64;
    let lam = kf.ln();
    let ln_f = |n: u64| n as f64 * lam + (1.0 - kf);
    let ln_t = ln_f(k);
    let first = (0..).find(|&n| ln_f(n) >= ln_t).unwrap_or(k);
    let tail = ln_poisson_tail(1.0, first).exp();
    let t = ln_t.exp();
    let lhs = t * (ln_t / ln_t.ln()).sqrt() * tail;
    let rhs = (ln_t / (kf * ln_t.ln())).sqrt() / 3.0;
    Ok(OptimalityWitness { k, t, tail, lhs, rhs })
}

/// `K_s(σ, η) = Π (1 + e^{−s} σᵢ ηᵢ)` on `{−1, 1}ⁿ`.
pub fn hypercube_kernel(s: f64, sigma: &[i8], eta: &[i8]) -> Result<f64> {
    if sigma.len() != eta.len() || sigma.iter().chain(eta).any(|v| v.abs() != 1) {
        return Err(domain("hypercube points must be equal-length ±1 vectors"));
    }
    let e = (-s).exp();
    Ok(sigma.iter().zip(eta).map(|(a, b)| 1.0 + e * (a * b) as f64).product())
}

/// `sup_η K_s(σ, η) = (1 + e^{−s})ⁿ`.
pub fn hypercube_sup(s: f64, n_dim: u32) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain("hypercube_sup needs s > 0"));
    }
    Ok((1.0 + (-s).exp()).powi(n_dim as i32))
}
