//! Deviation of log-convex functions under the Poisson law.

use serde::{Deserialize, Serialize};

use crate::discrete::{ln_poisson_pmf, ln_poisson_tail, FuncOnN};
use crate::error::{domain, Error, Result};
use crate::specfun::{phi_theta_inverse, LogSum};
use crate::tail::{loglog_envelope, TailCurve};

/// Measured tails of a normalized log-convex `f` under `π_θ`.
///
/// `curve.bound` is the rigorous envelope `min(1/t, 2/(t √Φ_θ^{-1}(ln t)))`,
/// the second term used only where `Φ_θ^{-1}(ln t) ≥ 2θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonDeviation {
    pub curve: TailCurve,
    /// `max_t tail(t) / (√(ln ln t)/(t √ln t))`.
    pub fitted_c: f64,
    /// `ln ∫ f dπ_θ` before normalization.
    pub ln_norm: f64,
}

/// `f_λ(n) = e^{λn + 1 − e^λ}`, normalized under `π_1`.
pub fn f_lambda(lambda: f64) -> FuncOnN {
    let c = -lambda.exp_m1();
    FuncOnN::from_log(move |n| lambda * n as f64 + c, c.exp(), lambda)
}

/// Envelope from the Poisson tail bound, where it applies.
fn proof_envelope(theta: f64, t: f64) -> Option<f64> {
    let l = t.ln();
    let u = phi_theta_inverse(theta, l).ok()?;
    (u >= 2.0 * theta).then(|| 2.0 / (t * u.sqrt()))
}

/// Exact tails `π_θ(f ≥ t ∫ f dπ_θ)` for `t ∈ t_grid ⊂ [4, ∞)`.
pub fn poisson_logconvex_deviation(theta: f64, f: &FuncOnN, t_grid: &[f64]) -> Result<PoissonDeviation> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(domain(format!("Poisson parameter must be positive, got {theta}")));
    }
    if t_grid.iter().any(|&t| !(t >= 4.0) || !t.is_finite()) {
        return Err(domain("thresholds must satisfy t ≥ 4"));
    }
    let t_max = t_grid.iter().copied().fold(4.0, f64::max);
    // Horizon: the neglected mass of f·π_θ and of π_θ itself are both far
    // below anything measured.
    let mut n_max = (4.0 * theta).ceil().max(64.0) as u64;
    loop {
        let ok_law = ln_poisson_tail(theta, n_max + 1) < -(t_max.ln() + 80.0);
        let ok_f = f.ln_tail_bound(n_max, 0, theta) < -80.0;
        if ok_law && ok_f {
            break;
        }
        if n_max > 1 << 22 {
            return Err(Error::Growth("f grows too fast to normalize under π_θ".into()));
        }
        n_max *= 2;
    }
    if let Some(m) = f.support() {
        n_max = n_max.min(m.max(2));
    }
    let ln_f: Vec<f64> = (0..=n_max).map(|n| f.ln_eval(n)).collect();
    if ln_f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("f must be positive and finite".into()));
    }
    for n in 1..n_max as usize {
        let d = ln_f[n + 1] - 2.0 * ln_f[n] + ln_f[n - 1];
        if d < -1e-12 * (1.0 + ln_f[n].abs()) {
            return Err(Error::Precondition(format!("Δ ln f({n}) = {d} < 0")));
        }
    }
    let mut norm = LogSum::default();
    for (n, lf) in ln_f.iter().enumerate() {
        norm.add(lf + ln_poisson_pmf(theta, n as u64));
    }
    let ln_norm = norm.value();
    let rising_at_end = ln_f[n_max as usize] > ln_f[n_max as usize - 1];
    let mut curve = TailCurve::default();
    let mut fitted_c: f64 = 0.0;
    for &t in t_grid {
        let level = t.ln() + ln_norm;
        let mut tail = LogSum::default();
        for (n, lf) in ln_f.iter().enumerate() {
            if *lf >= level {
                tail.add(ln_poisson_pmf(theta, n as u64));
            }
        }
        if rising_at_end {
            tail.add(ln_poisson_tail(theta, n_max + 1));
        }
        let tail = tail.value().exp();
        let markov = 1.0 / t;
        let bound = proof_envelope(theta, t).map_or(markov, |p| p.min(markov));
        fitted_c = fitted_c.max(tail / loglog_envelope(t));
        curve.push(t, tail, bound);
    }
    Ok(PoissonDeviation { curve, fitted_c, ln_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::log_factorial;

    #[test]
    fn constant_has_empty_tail() {
        let d = poisson_logconvex_deviation(1.5, &FuncOnN::log_linear(0.0), &[4.0, 100.0]).unwrap();
        assert!(d.curve.tail.iter().all(|&v| v == 0.0));
        assert!(d.ln_norm.abs() < 1e-14);
    }

    #[test]
    fn f_lambda_tail_is_poisson_tail() {
        // f_λ ≥ t ⇔ n ≥ ln(t/c(λ))/λ; with λ = ln k and t = e k^k e^{−k} that is n ≥ k.
        let k = 7u64;
        let lam = (k as f64).ln();
        let ln_t = 1.0 + k as f64 * lam - k as f64;
        let t = ln_t.exp() * (1.0 - 1e-12);
        let d = poisson_logconvex_deviation(1.0, &f_lambda(lam), &[t]).unwrap();
        let exact: f64 = (k..k + 60).map(|n| (-1.0 - log_factorial(n)).exp()).sum();
        assert!((d.curve.tail[0] - exact).abs() < 1e-12 * exact);
        assert!(d.ln_norm.abs() < 1e-12);
    }
}
