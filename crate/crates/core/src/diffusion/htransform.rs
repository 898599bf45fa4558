//! One-dimensional reversible diffusions `L_h = ∂² − h' ∂` written as
//! Schrödinger operators over the standard OU generator.
//!
//! With `W = x²/2 − h` and `V = ½(1 − h'') − ¼(x² − h'²)`,
//! `𝒫_t f = e^{−W/2} P_t^V(e^{W/2} f)`.

use serde::{Deserialize, Serialize};

use super::fk::{hess_log_fk, simulate_paths, FkEstimate, HessEstimate, PathSpec, Want};
use super::{OUParams, PositiveFn, Potential};
use crate::error::{Error, Result};
use crate::specfun::quad::{integrate, QuadOptions};
use crate::specfun::roots::golden_max;
use crate::specfun::CompensatedSum;

/// Half-width of the window on which bounds on `V`, `V''` and `h''` are searched.
const SCAN_RADIUS: f64 = 60.0;
const SCAN_POINTS: usize = 6001;

/// Potential `h` of `μ_h(dx) = e^{−h(x)} dx / Z_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential1D {
    /// `x²/2`.
    Gaussian,
    /// `x²/2 + (1 + x²)^{p/2}`.
    GaussianPlusBracket { p: f64 },
    /// `x²/2 + ε cos x`.
    GaussianCos { eps: f64 },
}

impl Potential1D {
    /// `[h, h', h'', h''', h'''']` at `x`.
    pub fn derivatives(&self, x: f64) -> [f64; 5] {
        let base = [x * x / 2.0, x, 1.0, 0.0, 0.0];
        let extra = match *self {
            Potential1D::Gaussian => [0.0; 5],
            Potential1D::GaussianPlusBracket { p } => {
                let m = p / 2.0;
                let u = 1.0 + x * x;
                let (x2, x3, x4) = (x * x, x * x * x, x * x * x * x);
                let m1 = m * (m - 1.0);
                let m2 = m1 * (m - 2.0);
                let m3 = m2 * (m - 3.0);
                [
                    u.powf(m),
                    2.0 * m * x * u.powf(m - 1.0),
                    2.0 * m * u.powf(m - 1.0) + 4.0 * m1 * x2 * u.powf(m - 2.0),
                    12.0 * m1 * x * u.powf(m - 2.0) + 8.0 * m2 * x3 * u.powf(m - 3.0),
                    12.0 * m1 * u.powf(m - 2.0) + 48.0 * m2 * x2 * u.powf(m - 3.0) + 16.0 * m3 * x4 * u.powf(m - 4.0),
                ]
            }
            Potential1D::GaussianCos { eps } => {
                let (s, c) = x.sin_cos();
                [eps * c, -eps * s, -eps * c, eps * s, eps * c]
            }
        };
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = base[i] + extra[i];
        }
        out
    }

    pub fn h(&self, x: f64) -> f64 {
        self.derivatives(x)[0]
    }

    /// `W = x²/2 − h`.
    pub fn w(&self, x: f64) -> f64 {
        x * x / 2.0 - self.h(x)
    }

    /// `V = ½(1 − h'') − ¼(x² − h'²)`.
    pub fn v(&self, x: f64) -> f64 {
        let d = self.derivatives(x);
        0.5 * (1.0 - d[2]) - 0.25 * (x * x - d[1] * d[1])
    }

    pub fn v_prime(&self, x: f64) -> f64 {
        let d = self.derivatives(x);
        -0.5 * d[3] - 0.5 * x + 0.5 * d[1] * d[2]
    }

    pub fn v_second(&self, x: f64) -> f64 {
        let d = self.derivatives(x);
        -0.5 * d[4] - 0.5 + 0.5 * (d[2] * d[2] + d[1] * d[3])
    }

    /// `ln ∫ e^{−h}`.
    pub fn ln_normalizer(&self) -> Result<f64> {
        let h0 = self.h(0.0);
        let r = integrate(
            &|x: f64| (-(self.h(x) - h0)).exp(),
            &[-40.0, -10.0, -3.0, 0.0, 3.0, 10.0, 40.0],
            QuadOptions::default(),
        )?;
        Ok(r.value.ln() - h0)
    }
}

fn scan(g: &dyn Fn(f64) -> f64, radius: f64) -> (f64, f64) {
    let step = 2.0 * radius / (SCAN_POINTS - 1) as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..SCAN_POINTS {
        let x = -radius + step * i as f64;
        let v = g(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - step).max(-radius);
    let hi = (best.0 + step).min(radius);
    let (x, v) = golden_max(g, lo, hi, 1e-10);
    if v > best.1 { (x, v) } else { best }
}

/// `sup g` on the real line, or `None` when the sup keeps growing as the
/// window widens. Sups approached at infinity move by far less than the
/// tolerance between the two windows; the wider value is returned.
pub(crate) fn bounded_sup(g: &dyn Fn(f64) -> f64) -> Option<f64> {
    let (_, inner) = scan(g, SCAN_RADIUS);
    let (_, outer) = scan(g, 2.0 * SCAN_RADIUS);
    let tol = 1e-3 * (1.0 + inner.abs());
    if !inner.is_finite() || !outer.is_finite() || outer > inner + tol {
        None
    } else {
        Some(outer)
    }
}

/// `h` together with numerically certified bounds on `V` and `h''`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HTransform {
    pub h: Potential1D,
    pub v_min: f64,
    pub sup_v_second: f64,
    /// `inf h''`.
    pub c: f64,
    /// `sup h''`.
    pub big_c: f64,
}

impl HTransform {
    pub fn potential(&self) -> HTransformPotential {
        HTransformPotential { h: self.h, v_min: self.v_min }
    }
}

/// Computes the Schrödinger pair and checks that `V` is bounded below.
pub fn h_transform(h: Potential1D) -> Result<HTransform> {
    let v_min = bounded_sup(&|x| -h.v(x))
        .map(|s| -s)
        .ok_or_else(|| Error::Inadmissible(format!("{h:?}: V is not bounded below")))?;
    let sup_v_second = bounded_sup(&|x| h.v_second(x))
        .ok_or_else(|| Error::Range(format!("{h:?}: no finite bracket for sup V''")))?;
    let (c, big_c) = curvature_bounds(h)?;
    Ok(HTransform { h, v_min, sup_v_second, c, big_c })
}

/// `(inf h'', sup h'')` over the line.
pub fn curvature_bounds(h: Potential1D) -> Result<(f64, f64)> {
    let big_c = bounded_sup(&|x| h.derivatives(x)[2])
        .ok_or_else(|| Error::Range(format!("{h:?}: h'' is unbounded")))?;
    let c = bounded_sup(&|x| -h.derivatives(x)[2])
        .map(|s| -s)
        .ok_or_else(|| Error::Range(format!("{h:?}: h'' is unbounded below")))?;
    Ok((c, big_c))
}

/// `V` as a [`Potential`] on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HTransformPotential {
    h: Potential1D,
    v_min: f64,
}

impl Potential for HTransformPotential {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.h.v(x[0])
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.h.v_prime(x[0]);
    }
    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.h.v_second(x[0]);
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(self.v_min)
    }
}

/// `e^{W/2} f`.
pub struct HTilt<'a> {
    pub h: Potential1D,
    pub f: &'a dyn PositiveFn,
}

impl PositiveFn for HTilt<'_> {
    fn ln_value(&self, x: &[f64]) -> f64 {
        0.5 * self.h.w(x[0]) + self.f.ln_value(x)
    }
    fn grad_ln(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.f.grad_ln(x, out)?;
        out[0] += 0.5 * (x[0] - self.h.derivatives(x[0])[1]);
        Ok(())
    }
    fn hess_ln(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.f.hess_ln(x, out)?;
        out[0] += 0.5 * (1.0 - self.h.derivatives(x[0])[2]);
        Ok(())
    }
}

/// `𝒫_t f(x)` by intertwining with the Feynman–Kac semigroup.
pub fn lh_apply(h: &HTransform, f: &dyn PositiveFn, t: f64, x: f64, spec: &PathSpec) -> Result<FkEstimate> {
    let params = OUParams::standard(1);
    let tilt = HTilt { h: h.h, f };
    let batch = simulate_paths(&params, &h.potential(), &tilt, t, &[x], spec, Want::default(), &[])?;
    let n = batch.len();
    let scale = -0.5 * h.h.w(x);
    let mut s = CompensatedSum::default();
    let mut s2 = CompensatedSum::default();
    let shift = batch.ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::Degenerate("all Feynman–Kac weights vanish".into()));
    }
    for &l in &batch.ln_w {
        let w = (l - shift).exp();
        s.add(w);
        s2.add(w * w);
    }
    let m = s.value() / n as f64;
    let var = (s2.value() / n as f64 - m * m).max(0.0);
    let k = (shift + scale).exp();
    Ok(FkEstimate { value: m * k, se: (var / n as f64).sqrt() * k, n_used: n, rejected: batch.rejected })
}

/// `(ln 𝒫_t f)''(x)` by the path formula for the tilted function.
pub fn lh_hess_log(h: &HTransform, f: &dyn PositiveFn, t: f64, x: f64, spec: &PathSpec) -> Result<HessEstimate> {
    let params = OUParams::standard(1);
    let tilt = HTilt { h: h.h, f };
    let mut est = hess_log_fk(&params, &h.potential(), &tilt, t, &[x], spec)?;
    est.value[0] -= 0.5 * (1.0 - h.h.derivatives(x)[2]);
    Ok(est)
}

/// `−c_t² − ½(1 − h''(x)) − ½ max(sup V'', 0)`.
///
/// The weight `∫₀ᵗ α_t(s)² ds` lies in `[0, ½]`, so the clamp keeps the
/// floor valid when `V''` is negative everywhere.
pub fn hess_lower_bound(h: &HTransform, t: f64, x: f64) -> Result<f64> {
    let params = OUParams::standard(1);
    params.check_time(t)?;
    let c_t = params.c_t(t);
    Ok(-c_t * c_t - 0.5 * (1.0 - h.h.derivatives(x)[2]) - 0.5 * h.sup_v_second.max(0.0))
}
