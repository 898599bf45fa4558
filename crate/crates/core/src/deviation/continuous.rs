//! Deviation bounds on the line for measures `μ_h(dx) = e^{−h(x)} dx`
//! with `c ≤ h'' ≤ C`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffusion::{curvature_bounds, Potential1D};
use crate::error::{domain, Error, Result};
use crate::seed::seed_derive;
use crate::specfun::quad::{integrate, QuadOptions};
use crate::specfun::log_sum_exp;
use crate::tail::{log_envelope, superlevel_intervals, TailCurve};

/// Probability measure `e^{−h(x)} dx / Z` with curvature bounds on `h`.
/// Beyond `±EXTENT` every supported `μ_h` has density below `e^{−790}`,
/// which underflows; level sets and masses are resolved on this range.
const EXTENT: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HMeasure {
    pub h: Potential1D,
    pub ln_z: f64,
    pub c: f64,
    pub big_c: f64,
}

impl HMeasure {
    pub fn new(h: Potential1D) -> Result<Self> {
        let (c, big_c) = curvature_bounds(h)?;
        if c < 0.0 {
            return Err(Error::Precondition(format!("{h:?}: h'' must be non-negative")));
        }
        for x in [0.5, 1.3, 2.9, 7.1] {
            if (h.h(x) - h.h(-x)).abs() > 1e-12 * (1.0 + h.h(x).abs()) {
                return Err(Error::Unsupported(format!("{h:?} is not symmetric")));
            }
        }
        Ok(HMeasure { h, ln_z: h.ln_normalizer()?, c, big_c })
    }

    /// `h + ln Z`, the potential of the normalized measure.
    pub fn potential(&self, x: f64) -> f64 {
        self.h.h(x) + self.ln_z
    }

    /// Half-width beyond which the measure carries less than `e^{−90}`;
    /// every supported `h` satisfies `h(x) ≥ x²/2 − 1`.
    pub fn radius(&self) -> f64 {
        14.0
    }

    /// `μ_h([a, b])`, with infinite endpoints allowed.
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        if !(a < b) {
            return Ok(0.0);
        }
        if let Potential1D::Gaussian = self.h {
            let (ca, cb) = (a / SQRT_2, b / SQRT_2);
            return Ok(if a >= 0.0 {
                0.5 * (libm::erfc(ca) - libm::erfc(cb))
            } else if b <= 0.0 {
                0.5 * (libm::erfc(-cb) - libm::erfc(-ca))
            } else {
                1.0 - 0.5 * (libm::erfc(-ca) + libm::erfc(cb))
            });
        }
        let (lo, hi) = (a.max(-EXTENT), b.min(EXTENT));
        if !(lo < hi) {
            return Ok(0.0);
        }
        let mut pts = vec![lo];
        let n = ((hi - lo) / 0.5).ceil().max(1.0) as usize;
        for i in 1..n {
            pts.push(lo + (hi - lo) * i as f64 / n as f64);
        }
        pts.push(hi);
        let res = integrate(|x| (-self.potential(x)).exp(), &pts, QuadOptions::default())?;
        Ok(res.value)
    }

    /// `ln ∫ e^{ln_f} dμ_h`.
    pub fn ln_integral(&self, ln_f: &dyn Fn(f64) -> f64, hints: &[f64]) -> Result<f64> {
        let r = self.radius();
        let n = 400;
        let mut shift = f64::NEG_INFINITY;
        for i in 0..=n {
            let x = -r + 2.0 * r * i as f64 / n as f64;
            shift = shift.max(ln_f(x) - self.potential(x));
        }
        if !shift.is_finite() {
            return Err(Error::Degenerate("∫ f dμ_h is not finite and positive".into()));
        }
        let mut pts: Vec<f64> = (0..=64).map(|i| -r + 2.0 * r * i as f64 / 64.0).collect();
        pts.extend(hints.iter().copied().filter(|x| x.abs() < r));
        pts.sort_by(f64::total_cmp);
        let res = integrate(|x| (ln_f(x) - self.potential(x) - shift).exp(), &pts, QuadOptions::default())?;
        Ok(res.value.ln() + shift)
    }
}

/// One term `w · exp(λx − κ(x − m)²/2)` of a semi-log-convex mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlcComponent {
    pub ln_weight: f64,
    pub slope: f64,
    pub curvature: f64,
    pub center: f64,
}

impl SlcComponent {
    fn ln_value(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.ln_weight + self.slope * x - 0.5 * self.curvature * d * d
    }
}

/// A positive function given by `ln f`, with `(ln f)'' ≥ −β`.
#[derive(Clone)]
pub struct SemiConvexFn {
    ln_f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub beta: f64,
    pub label: String,
    /// Points where `f` concentrates, used as quadrature breakpoints.
    pub hints: Vec<f64>,
}

impl fmt::Debug for SemiConvexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiConvexFn").field("label", &self.label).field("beta", &self.beta).finish()
    }
}

impl SemiConvexFn {
    pub fn new(label: impl Into<String>, beta: f64, ln_f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SemiConvexFn { ln_f: Arc::new(ln_f), beta, label: label.into(), hints: Vec::new() }
    }

    /// `Σ_i w_i exp(λ_i x − κ_i (x − m_i)²/2)` with every `κ_i ≤ β`.
    ///
    /// Each term times `e^{βx²/2}` is log-convex and sums of log-convex
    /// functions are log-convex, so the mixture is β-semi-log-convex.
    pub fn mixture(label: impl Into<String>, beta: f64, comps: Vec<SlcComponent>) -> Result<Self> {
        if comps.is_empty() || comps.iter().any(|c| !(c.curvature >= 0.0 && c.curvature <= beta)) {
            return Err(domain("mixture components need curvature in [0, β]"));
        }
        let hints = comps.iter().map(|c| c.center + if c.curvature > 0.0 { c.slope / c.curvature } else { 0.0 }).collect();
        let f = move |x: f64| {
            let v: Vec<f64> = comps.iter().map(|c| c.ln_value(x)).collect();
            log_sum_exp(&v)
        };
        let mut out = Self::new(label, beta, f);
        out.hints = hints;
        Ok(out)
    }

    pub fn ln_value(&self, x: f64) -> f64 {
        (self.ln_f)(x)
    }

    /// Checks `(ln f)'' ≥ −β` by second differences on `[lo, hi]`.
    pub fn verify(&self, lo: f64, hi: f64, points: usize) -> Result<()> {
        let h = 1e-3;
        for i in 0..=points {
            let x = lo + (hi - lo) * i as f64 / points as f64;
            let (a, b, c) = (self.ln_value(x - h), self.ln_value(x), self.ln_value(x + h));
            let d2 = (a - 2.0 * b + c) / (h * h);
            let tol = 1e-6 * (1.0 + a.abs() + b.abs() + c.abs());
            if d2 < -self.beta - tol {
                return Err(Error::Precondition(format!(
                    "{}: (ln f)'' = {d2} < −{} at x = {x}",
                    self.label, self.beta
                )));
            }
        }
        Ok(())
    }
}

/// Seeded corpus of `count` β-semi-log-convex mixtures of one to three terms.
///
/// The first function of the corpus is the extremal bump `e^{−βx²/2}`
/// (or `e^{x}` when `β = 0`).
pub fn semiconvex_corpus(seed: u64, beta: f64, count: usize) -> Vec<SemiConvexFn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_derive(seed, &["slc-corpus", &format!("{beta:e}")]));
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let comps = if i == 0 {
            vec![SlcComponent { ln_weight: 0.0, slope: if beta == 0.0 { 1.0 } else { 0.0 }, curvature: beta, center: 0.0 }]
        } else {
            let k = rng.random_range(1..=3);
            (0..k)
                .map(|_| SlcComponent {
                    ln_weight: rng.random_range(-2.0..2.0),
                    slope: rng.random_range(-3.0..3.0),
                    curvature: if rng.random_bool(0.5) { beta } else { rng.random_range(0.0..=beta) },
                    center: rng.random_range(-3.0..3.0),
                })
                .collect()
        };
        out.push(SemiConvexFn::mixture(format!("slc-{i}"), beta, comps).expect("valid components"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupBoundRow {
    pub x: f64,
    /// `φ(x) − ln ∫ e^φ dμ_h`.
    pub lhs: f64,
    /// `½ ln((C + β)/(2π)) + h(x)`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupBoundReport {
    pub rows: Vec<SupBoundRow>,
    pub violations: usize,
}

/// Checks `φ(x) − ln ∫ e^φ dμ_h ≤ ½ ln((C + β)/(2π)) + h(x)` on `x_grid`.
pub fn check_semiconvex_sup_bound(mu: &HMeasure, phi: &SemiConvexFn, x_grid: &[f64]) -> Result<SupBoundReport> {
    let ln_int = mu.ln_integral(&|x| phi.ln_value(x), &phi.hints)?;
    let k = 0.5 * ((mu.big_c + phi.beta) / (2.0 * PI)).ln();
    let mut rep = SupBoundReport { rows: Vec::with_capacity(x_grid.len()), violations: 0 };
    for &x in x_grid {
        let row = SupBoundRow { x, lhs: phi.ln_value(x) - ln_int, rhs: k + mu.potential(x) };
        if row.lhs > row.rhs + 1e-9 * (1.0 + row.rhs.abs()) {
            rep.violations += 1;
        }
        rep.rows.push(row);
    }
    Ok(rep)
}

/// `μ_h(f ≥ t ∫ f dμ_h)` against `((C + β)/c) / (t √ln t)` for each `t ≥ 2`.
pub fn deviation_bound_diffusion(mu: &HMeasure, f: &SemiConvexFn, t_grid: &[f64]) -> Result<TailCurve> {
    if t_grid.iter().any(|&t| !(t >= 2.0) || !t.is_finite()) {
        return Err(domain("deviation thresholds must satisfy t ≥ 2"));
    }
    if !(mu.c > 0.0) {
        return Err(Error::Precondition("deviation bound needs inf h'' > 0".into()));
    }
    let ln_int = mu.ln_integral(&|x| f.ln_value(x), &f.hints)?;
    let n = 64_000;
    let grid: Vec<f64> = (0..=n).map(|i| -EXTENT + 2.0 * EXTENT * i as f64 / n as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&x| f.ln_value(x)).collect();
    let d = (mu.big_c + f.beta) / mu.c;
    let mut curve = TailCurve::default();
    for &t in t_grid {
        let level = t.ln() + ln_int;
        let mut tail = 0.0;
        for (a, b) in superlevel_intervals(&|x| f.ln_value(x), &grid, &values, level)? {
            tail += mu.mass(a, b)?;
        }
        curve.push(t, tail, d * log_envelope(t));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mass_and_normalizer() {
        let mu = HMeasure::new(Potential1D::Gaussian).unwrap();
        assert!((mu.ln_z - 0.5 * (2.0 * PI).ln()).abs() < 1e-12);
        assert!((mu.mass(f64::NEG_INFINITY, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        let b = HMeasure::new(Potential1D::GaussianPlusBracket { p: 1.0 }).unwrap();
        assert!((b.mass(f64::NEG_INFINITY, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        assert!((b.mass(0.0, f64::INFINITY).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn corpus_is_semiconvex() {
        for beta in [0.0, 1.0, 5.0] {
            for f in semiconvex_corpus(3, beta, 20) {
                f.verify(-8.0, 8.0, 400).unwrap();
            }
        }
    }

    #[test]
    fn linear_phi_gaussian_closed_form() {
        let mu = HMeasure::new(Potential1D::Gaussian).unwrap();
        let lam = 1.3;
        let phi = SemiConvexFn::new("lin", 0.0, move |x| lam * x);
        let rep = check_semiconvex_sup_bound(&mu, &phi, &[-1.0, 0.0, 2.0]).unwrap();
        for r in &rep.rows {
            assert!((r.lhs - (lam * r.x - 0.5 * lam * lam)).abs() < 1e-10);
        }
        assert_eq!(rep.violations, 0);
    }
}
