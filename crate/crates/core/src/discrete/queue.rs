//! The M/M/∞ transition kernel and its log-Laplacian checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    ln_binomial_pmf, ln_poisson_pmf, ln_poisson_tail, second_difference, FuncOnN, MMParams, PmfTable,
};
use crate::error::{domain, Error, Result};
use crate::specfun::{Accuracy, CompensatedSum, LogSum};

/// Absolute slack on log-scale inequality checks, covering rounding only.
pub const LOG_SLACK: f64 = 1e-12;

/// `ln P(X_t = k | X_0 = n)`.
pub fn ln_mm_transition(params: &MMParams, n: u64, k: u64) -> f64 {
    let (p, theta) = (params.p(), params.rho() * params.q());
    let mut s = LogSum::default();
    for i in 0..=n.min(k) {
        s.add(ln_binomial_pmf(n, p, i) + ln_poisson_pmf(theta, k - i));
    }
    s.value()
}

/// `P(X_t = k | X_0 = n)`.
pub fn mm_transition(params: &MMParams, n: u64, k: u64) -> f64 {
    ln_mm_transition(params, n, k).exp()
}

/// Law of `X_t` given `X_0 = n`, truncated where the Poisson part has
/// tail below `max(acc.abs_tol, 1e-15)`.
pub fn mm_law(params: &MMParams, n: u64, acc: Accuracy) -> Result<PmfTable> {
    let theta = params.rho() * params.q();
    let tol = acc.abs_tol.max(1e-15).ln();
    let mut kp = 0u64;
    while ln_poisson_tail(theta, kp + 1) > tol {
        kp += 1;
        if kp as usize > acc.max_terms {
            return Err(Error::Accuracy("Poisson truncation".into()));
        }
    }
    let values = (0..=n + kp).map(|k| mm_transition(params, n, k)).collect();
    Ok(PmfTable { values, truncation_mass: ln_poisson_tail(theta, kp + 1).exp() })
}

/// `P_t f(n) = Σ_k f(k) P(X_t = k | X_0 = n)`, truncated by the declared
/// support or growth of `f`.
pub fn mm_apply(params: &MMParams, f: &FuncOnN, n: u64, acc: Accuracy) -> Result<f64> {
    let theta = params.rho() * params.q();
    let mut sum = CompensatedSum::default();
    let mut abs_sum = 0.0;
    let mut k = 0u64;
    loop {
        let fk = f.eval(k);
        if !fk.is_finite() {
            return Err(Error::Growth(format!("f({k}) = {fk}")));
        }
        if fk != 0.0 {
            let term = fk * mm_transition(params, n, k);
            sum.add(term);
            abs_sum += term.abs();
        }
        if f.support().is_some_and(|m| k >= m) {
            break;
        }
        if k >= n && (k - n).is_multiple_of(8) {
            let ln_rest = f.ln_tail_bound(k, n, theta);
            let tol = acc.abs_tol.max(acc.rel_tol * abs_sum);
            if ln_rest < tol.ln() {
                break;
            }
        }
        if (k.saturating_sub(n)) as usize > acc.max_terms {
            return Err(Error::Growth(format!("series for P_t f({n}) does not settle within {} terms", acc.max_terms)));
        }
        k += 1;
    }
    Ok(sum.value())
}

/// Log transition matrix `ln P(X_t = k | X_0 = n)` for `n ≤ n_max`, `k ≤ k_max`.
#[derive(Debug, Clone)]
pub struct MmKernel {
    params: MMParams,
    n_max: u64,
    k_max: u64,
    ln_rows: Vec<Vec<f64>>,
}

impl MmKernel {
    pub fn new(params: MMParams, n_max: u64, k_max: u64) -> Self {
        let p = params.p();
        let theta = params.rho() * params.q();
        let ln_pois: Vec<f64> = (0..=k_max).map(|j| ln_poisson_pmf(theta, j)).collect();
        let ln_rows = (0..=n_max)
            .into_par_iter()
            .map(|n| {
                let ln_bin: Vec<f64> = (0..=n).map(|i| ln_binomial_pmf(n, p, i)).collect();
                (0..=k_max)
                    .map(|k| {
                        let mut s = LogSum::default();
                        for i in 0..=n.min(k) {
                            s.add(ln_bin[i as usize] + ln_pois[(k - i) as usize]);
                        }
                        s.value()
                    })
                    .collect()
            })
            .collect();
        MmKernel { params, n_max, k_max, ln_rows }
    }

    /// Kernel wide enough that `f` is summed to relative accuracy `1e-15`
    /// at every `n ≤ n_max`.
    pub fn for_function(params: MMParams, n_max: u64, f: &FuncOnN) -> Result<(Self, Vec<f64>)> {
        let mut extra = 64u64;
        for _ in 0..8 {
            let k_max = match f.support() {
                Some(m) => (n_max + extra).max(m),
                None => n_max + extra,
            };
            let kernel = MmKernel::new(params, n_max, k_max);
            match kernel.ln_apply(f) {
                Ok(v) => return Ok((kernel, v)),
                Err(Error::Accuracy(_)) => extra *= 2,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Growth("kernel truncation did not converge".into()))
    }

    pub fn params(&self) -> &MMParams {
        &self.params
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    pub fn ln_transition(&self, n: u64, k: u64) -> f64 {
        self.ln_rows[n as usize][k as usize]
    }

    /// `ln P_t f(n)` for `n = 0..=n_max`; `f ≥ 0`.
    pub fn ln_apply(&self, f: &FuncOnN) -> Result<Vec<f64>> {
        let ln_f: Vec<f64> = (0..=self.k_max).map(|k| f.ln_eval(k)).collect();
        if let Some(k) = ln_f.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(domain(format!("log-kernel needs finite f ≥ 0, f({k}) is not")));
        }
        let theta = self.params.rho() * self.params.q();
        self.ln_rows
            .iter()
            .enumerate()
            .map(|(n, row)| {
                let mut s = LogSum::default();
                for (a, b) in ln_f.iter().zip(row) {
                    s.add(a + b);
                }
                let v = s.value();
                let rest = f.ln_tail_bound(self.k_max, n as u64, theta);
                if rest > v + 1e-15f64.ln() {
                    return Err(Error::Accuracy(format!("truncation at k = {} too short for n = {n}", self.k_max)));
                }
                Ok(v)
            })
            .collect()
    }

    /// `Δ log P_t f(n)` on `1..n_max` against the uniform lower bound,
    /// reusing this kernel.
    pub fn semilogconvexity(&self, f: &FuncOnN) -> Result<SemiLogConvexReport> {
        if self.n_max < 2 {
            return Err(domain("kernel needs n_max ≥ 2"));
        }
        let ln_pf = self.ln_apply(f)?;
        Ok(report_from_ln(&ln_pf, self.n_max - 1, semilogconvex_bound(&self.params)))
    }
}

/// `ln((1 − p²/(p + ρ(1−p)²)²)/12)`.
pub fn semilogconvex_bound(params: &MMParams) -> f64 {
    let p = params.p();
    let q = params.q();
    let d = p + params.rho() * q * q;
    ((1.0 - (p / d).powi(2)) / 12.0).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiLogConvexReport {
    pub bound: f64,
    /// `(n, Δ log P_t f(n))` for `n = 1..=n_max`.
    pub rows: Vec<(u64, f64)>,
    pub violations: Vec<u64>,
}

impl SemiLogConvexReport {
    pub fn min_value(&self) -> f64 {
        self.rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min)
    }
}

/// `Δ log P_t f(n)` on `1..=n_max` against the uniform lower bound.
pub fn check_mm_semilogconvexity(params: &MMParams, f: &FuncOnN, n_max: u64) -> Result<SemiLogConvexReport> {
    if n_max == 0 {
        return Err(domain("n_max must be positive"));
    }
    let (_, ln_pf) = MmKernel::for_function(*params, n_max + 1, f)?;
    Ok(report_from_ln(&ln_pf, n_max, semilogconvex_bound(params)))
}

pub(crate) fn report_from_ln(ln_pf: &[f64], n_max: u64, bound: f64) -> SemiLogConvexReport {
    let mut rows = Vec::with_capacity(n_max as usize);
    let mut violations = Vec::new();
    for n in 1..=n_max {
        let v = second_difference(ln_pf, n as usize);
        if !(v >= bound - LOG_SLACK) {
            violations.push(n);
        }
        rows.push((n, v));
    }
    SemiLogConvexReport { bound, rows, violations }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationReport {
    pub bound: f64,
    pub rows: Vec<(u64, f64)>,
    pub violations: Vec<u64>,
}

/// `Δ log Σ αᵢ fᵢ ≥ −max βᵢ` given `Δ log fᵢ ≥ −βᵢ` on `1..=n_max`.
pub fn check_combination_bound(
    funcs: &[FuncOnN],
    betas: &[f64],
    weights: &[f64],
    n_max: u64,
) -> Result<CombinationReport> {
    if funcs.is_empty() || funcs.len() != betas.len() || funcs.len() != weights.len() {
        return Err(domain("functions, betas and weights must be non-empty and of equal length"));
    }
    if weights.iter().any(|w| !(*w > 0.0)) || betas.iter().any(|b| !(*b >= 0.0)) {
        return Err(domain("weights must be positive and betas non-negative"));
    }
    let mut ln_sum = vec![LogSum::default(); n_max as usize + 2];
    for (i, f) in funcs.iter().enumerate() {
        let ln_f: Vec<f64> = (0..=n_max + 1).map(|k| f.ln_eval(k)).collect();
        if ln_f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!("function {i} must be positive on 0..={}", n_max + 1)));
        }
        for n in 1..=n_max as usize {
            if second_difference(&ln_f, n) < -betas[i] - LOG_SLACK {
                return Err(Error::Precondition(format!(
                    "function {i} has Δ log f({n}) = {} < −β = {}",
                    second_difference(&ln_f, n),
                    -betas[i]
                )));
            }
        }
        for (acc, v) in ln_sum.iter_mut().zip(&ln_f) {
            acc.add(weights[i].ln() + v);
        }
    }
    let ln_g: Vec<f64> = ln_sum.iter().map(|s| s.value()).collect();
    let bound = -betas.iter().copied().fold(0.0, f64::max);
    let r = report_from_ln(&ln_g, n_max, bound);
    Ok(CombinationReport { bound, rows: r.rows, violations: r.violations })
}

/// Shape properties carried from `f` to `P_t f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Property {
    /// `Δ log f ≥ −β`.
    SemiLogConvex { beta: f64 },
    /// `Δ log f ≤ 0`.
    LogConcave,
    /// `f · π_ρ` is ultra-log-concave.
    UltraLogConcaveLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub property: Property,
    /// `(n, input statistic, output statistic)`; the statistic is `Δ log`
    /// or, for ultra-log-concavity, `ln(n h(n)² / ((n+1) h(n+1) h(n−1)))`.
    pub rows: Vec<(u64, f64, f64)>,
    pub input_checked_to: u64,
    pub violations: Vec<u64>,
}

fn property_statistic(property: Property, ln_h: &[f64], n: usize, ln_pi: &[f64]) -> f64 {
    match property {
        Property::SemiLogConvex { .. } | Property::LogConcave => second_difference(ln_h, n),
        Property::UltraLogConcaveLaw => {
            let l = |j: usize| ln_h[j] + ln_pi[j];
            2.0 * l(n) + (n as f64).ln() - ((n + 1) as f64).ln() - l(n + 1) - l(n - 1)
        }
    }
}

/// Rounding allowance for a second difference of values of size `|ln h|`.
fn slack(ln_h: &[f64], n: usize) -> f64 {
    let scale = ln_h[n - 1].abs() + 2.0 * ln_h[n].abs() + ln_h[n + 1].abs();
    LOG_SLACK.max(4.0 * f64::EPSILON * scale)
}

fn property_holds(property: Property, v: f64, slack: f64) -> bool {
    match property {
        Property::SemiLogConvex { beta } => v >= -beta - slack,
        Property::LogConcave => v <= slack,
        Property::UltraLogConcaveLaw => v >= -slack,
    }
}

/// Verifies `property` for `f` on the range the kernel reads, then for
/// `P_t f` on `1..=n_max`.
pub fn check_preservation(
    params: &MMParams,
    f: &FuncOnN,
    property: Property,
    n_max: u64,
) -> Result<PreservationReport> {
    if n_max == 0 {
        return Err(domain("n_max must be positive"));
    }
    let (kernel, ln_pf) = MmKernel::for_function(*params, n_max + 1, f)?;
    let k_in = kernel.k_max();
    let ln_f: Vec<f64> = (0..=k_in).map(|k| f.ln_eval(k)).collect();
    if ln_f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition(format!("f must be positive on 0..={k_in}")));
    }
    let rho = params.rho();
    let ln_pi: Vec<f64> = (0..=k_in).map(|k| ln_poisson_pmf(rho, k)).collect();
    for n in 1..k_in as usize {
        let v = property_statistic(property, &ln_f, n, &ln_pi);
        if !property_holds(property, v, slack(&ln_f, n)) {
            return Err(Error::Precondition(format!("input fails {property:?} at n = {n}: {v}")));
        }
    }
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for n in 1..=n_max as usize {
        let vin = property_statistic(property, &ln_f, n, &ln_pi);
        let vout = property_statistic(property, &ln_pf, n, &ln_pi);
        if !property_holds(property, vout, slack(&ln_pf, n)) {
            violations.push(n as u64);
        }
        rows.push((n as u64, vin, vout));
    }
    Ok(PreservationReport { property, rows, input_checked_to: k_in - 1, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_probability_vectors() {
        let params = MMParams::with_rho(1.5, 0.7).unwrap();
        for n in [0u64, 1, 5, 40] {
            let law = mm_law(&params, n, Accuracy::default()).unwrap();
            assert!((law.total() + law.truncation_mass - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn time_zero_is_identity() {
        let params = MMParams::with_rho(1.0, 0.0).unwrap();
        assert_eq!(mm_transition(&params, 4, 4), 1.0);
        assert_eq!(mm_transition(&params, 4, 5), 0.0);
    }

    #[test]
    fn apply_mean() {
        let params = MMParams::with_rho(2.0, 0.4).unwrap();
        let f = FuncOnN::new(|k| k as f64, 1.0, 1.0);
        for n in [0u64, 3, 10] {
            let v = mm_apply(&params, &f, n, Accuracy::default()).unwrap();
            let expect = n as f64 * params.p() + params.rho() * params.q();
            assert!((v - expect).abs() < 1e-12 * expect.max(1.0));
        }
    }

    #[test]
    fn kernel_apply_matches_direct_sum() {
        let params = MMParams::with_rho(0.5, 0.3).unwrap();
        let f = FuncOnN::log_linear(0.4);
        let (_, ln_pf) = MmKernel::for_function(params, 30, &f).unwrap();
        for n in [0u64, 7, 30] {
            let direct = mm_apply(&params, &f, n, Accuracy::default()).unwrap();
            assert!((ln_pf[n as usize] - direct.ln()).abs() < 1e-12);
        }
    }
}
