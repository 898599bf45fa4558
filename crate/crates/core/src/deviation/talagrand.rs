//! Regularization of `𝒫_s g` for reversible diffusions `L_h` on the line.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::continuous::{HMeasure, SemiConvexFn};
use crate::diffusion::{
    h_transform, lh_apply, ou_mehler_apply, HTransform, LnFn, OUParams, PathSpec, Potential1D,
};
use crate::error::{domain, Error, Result};
use crate::tail::{log_envelope, superlevel_intervals, TailCurve};

/// Tail curve of `𝒫_s g` for one member of the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeCurve {
    pub label: String,
    pub curve: TailCurve,
    /// Smallest second difference of `ln 𝒫_s g` on the evaluation grid.
    pub min_log_hess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionTalagrand {
    pub h: Potential1D,
    pub s: f64,
    /// `max(0, c_s² + ½(1 − c) + ½ sup V'')`, infinite when `V` is unbounded below.
    pub beta: f64,
    /// `(C + β)/c`.
    pub d_const: f64,
    /// Set when `V` is unbounded below; the bound column then carries the
    /// fitted constant and nothing is verified.
    pub exploratory: bool,
    pub curves: Vec<SpikeCurve>,
    pub fitted_d: f64,
    pub violations: usize,
}

/// Evaluation settings for `talagrand_diffusion_experiment`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionTalagrandOptions {
    /// Half-width of the `x`-grid.
    pub radius: f64,
    pub x_points: usize,
    /// Monte Carlo settings when `h` is not Gaussian.
    pub paths: PathSpec,
    /// Add the normalized point mass at this location (Gaussian `h` only).
    pub spike_at: Option<f64>,
}

impl Default for DiffusionTalagrandOptions {
    fn default() -> Self {
        DiffusionTalagrandOptions { radius: 6.0, x_points: 121, paths: PathSpec::new(4096, 0).with_steps(64), spike_at: Some(1.5) }
    }
}

fn interpolate(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let i = grid.partition_point(|&g| g < x).clamp(1, grid.len() - 1);
    let (x0, x1) = (grid[i - 1], grid[i]);
    let w = (x - x0) / (x1 - x0);
    values[i - 1] * (1.0 - w) + values[i] * w
}

/// Measures `μ_h(𝒫_s g ≥ t ∫ g dμ_h)` for each `g` in `corpus` and compares
/// with `((C + β)/c) / (t √ln t)`.
///
/// `𝒫_s g` is computed by Gauss–Hermite quadrature of the Mehler formula
/// when `h = x²/2`, and by the Feynman–Kac representation otherwise.
pub fn talagrand_diffusion_experiment(
    h: Potential1D,
    s: f64,
    t_grid: &[f64],
    corpus: &[SemiConvexFn],
    opts: &DiffusionTalagrandOptions,
) -> Result<DiffusionTalagrand> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(domain(format!("s must be positive, got {s}")));
    }
    if t_grid.iter().any(|&t| !(t >= 2.0)) {
        return Err(domain("thresholds must satisfy t ≥ 2"));
    }
    if opts.x_points < 3 || !(opts.radius > 0.0) {
        return Err(domain("x-grid needs at least three points and a positive radius"));
    }
    let mu = HMeasure::new(h)?;
    let ou = OUParams::standard(1);
    let c_s = ou.c_t(s);
    let (transform, exploratory) = match h_transform(h) {
        Ok(tr) => (tr, false),
        Err(Error::Inadmissible(_)) | Err(Error::Range(_)) => (
            HTransform { h, v_min: f64::NEG_INFINITY, sup_v_second: f64::INFINITY, c: mu.c, big_c: mu.big_c },
            true,
        ),
        Err(e) => return Err(e),
    };
    let beta = (c_s * c_s + 0.5 * (1.0 - mu.c) + 0.5 * transform.sup_v_second).max(0.0);
    let d_const = if mu.c > 0.0 { (mu.big_c + beta) / mu.c } else { f64::INFINITY };
    let grid: Vec<f64> = (0..opts.x_points)
        .map(|i| -opts.radius + 2.0 * opts.radius * i as f64 / (opts.x_points - 1) as f64)
        .collect();

    let mut members: Vec<(String, Vec<f64>, f64)> = Vec::new();
    for (gi, g) in corpus.iter().enumerate() {
        let ln_norm = mu.ln_integral(&|x| g.ln_value(x), &g.hints)?;
        let values: Vec<f64> = match h {
            Potential1D::Gaussian => grid
                .par_iter()
                .map(|&x| {
                    let r = ou_mehler_apply(&ou, &|y: &[f64]| g.ln_value(y[0]).exp(), s, &[x], 96)?;
                    Ok(r.value.ln())
                })
                .collect::<Result<_>>()?,
            _ => {
                let mut spec = opts.paths;
                spec.check_admissible = !exploratory;
                let f = LnFn(|y: &[f64]| g.ln_value(y[0]));
                grid.iter()
                    .enumerate()
                    .map(|(xi, &x)| {
                        let mut sp = spec;
                        sp.seed = crate::seed::seed_derive(spec.seed, &["diffusion-talagrand", &gi.to_string(), &xi.to_string()]);
                        Ok(lh_apply(&transform, &f, s, x, &sp)?.value.ln())
                    })
                    .collect::<Result<_>>()?
            }
        };
        members.push((g.label.clone(), values, ln_norm));
    }
    if let (Some(y), Potential1D::Gaussian) = (opts.spike_at, h) {
        // 𝒫_s(δ_y/γ(y))(x) = p_s(x, y)/γ(y).
        let (m, v) = (ou.decay(s), ou.variance(s));
        let values = grid.iter().map(|&x| -(y - m * x).powi(2) / (2.0 * v) - 0.5 * v.ln() + 0.5 * y * y).collect();
        members.push((format!("spike@{y}"), values, 0.0));
    }

    let mut out = DiffusionTalagrand {
        h,
        s,
        beta,
        d_const,
        exploratory,
        curves: Vec::new(),
        fitted_d: 0.0,
        violations: 0,
    };
    for (label, values, ln_norm) in members {
        let interp = |x: f64| interpolate(&grid, &values, x);
        let mut curve = TailCurve::default();
        for &t in t_grid {
            let level = t.ln() + ln_norm;
            let mut tail = 0.0;
            for (a, b) in superlevel_intervals(&interp, &grid, &values, level)? {
                tail += mu.mass(a, b)?;
            }
            out.fitted_d = out.fitted_d.max(tail / log_envelope(t));
            curve.push(t, tail, d_const * log_envelope(t));
        }
        let dx = grid[1] - grid[0];
        let min_log_hess = (1..grid.len() - 1)
            .map(|i| (values[i - 1] - 2.0 * values[i] + values[i + 1]) / (dx * dx))
            .fold(f64::INFINITY, f64::min);
        out.curves.push(SpikeCurve { label, curve, min_log_hess });
    }
    if exploratory {
        for c in &mut out.curves {
            for (b, &t) in c.curve.bound.iter_mut().zip(&c.curve.t) {
                *b = out.fitted_d * log_envelope(t);
            }
        }
    } else {
        out.violations = out.curves.iter().map(|c| c.curve.violations(1e-9).len()).sum();
    }
    Ok(out)
}
