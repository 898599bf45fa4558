//! Numerical Legendre transforms on a bounded interval.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::roots::golden_max;

const COARSE: usize = 512;

/// `g*(y) = sup_{x ∈ [lo, hi]} (xy − g(x))` on a grid of slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjugate {
    pub y: Vec<f64>,
    pub value: Vec<f64>,
    pub argmax: Vec<f64>,
}

fn check_convex(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(domain(format!("conjugate domain [{lo}, {hi}] must be a bounded interval")));
    }
    let n = 4 * COARSE;
    let h = (hi - lo) / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| g(lo + h * i as f64)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(domain("g must be finite on its domain"));
    }
    for i in 1..n {
        let d2 = vals[i - 1] - 2.0 * vals[i] + vals[i + 1];
        let scale = vals[i - 1].abs() + 2.0 * vals[i].abs() + vals[i + 1].abs();
        if d2 < -1e-12 * scale.max(1.0) {
            return Err(Error::Precondition(format!("g is not convex near x = {}", lo + h * i as f64)));
        }
    }
    Ok(())
}

/// `(g*(y), argmax)` by a coarse grid and golden-section refinement.
///
/// `x ↦ xy − g(x)` is concave, so refinement in the cell around the grid
/// maximizer finds the supremum.
pub fn conjugate_at(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, y: f64) -> (f64, f64) {
    let h = (hi - lo) / COARSE as f64;
    let obj = |x: f64| x * y - g(x);
    let mut best = (lo, obj(lo));
    for i in 1..=COARSE {
        let x = if i == COARSE { hi } else { lo + h * i as f64 };
        let v = obj(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let a = (best.0 - h).max(lo);
    let b = (best.0 + h).min(hi);
    let (x, v) = golden_max(obj, a, b, 1e-13 * (1.0 + best.0.abs()));
    if v > best.1 { (v, x) } else { (best.1, best.0) }
}

/// Legendre transform of a convex `g` restricted to `[lo, hi]`.
pub fn convex_conjugate(g: &dyn Fn(f64) -> f64, domain: (f64, f64), y_grid: &[f64]) -> Result<Conjugate> {
    let (lo, hi) = domain;
    check_convex(g, lo, hi)?;
    let mut out = Conjugate { y: y_grid.to_vec(), value: Vec::new(), argmax: Vec::new() };
    for &y in y_grid {
        let (v, x) = conjugate_at(g, lo, hi, y);
        out.value.push(v);
        out.argmax.push(x);
    }
    Ok(out)
}

/// `g**(x) = sup_{y ∈ [y_lo, y_hi]} (xy − g*(y))` with `g*` evaluated on demand.
pub fn biconjugate(g: &dyn Fn(f64) -> f64, domain: (f64, f64), y_range: (f64, f64), x_grid: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = domain;
    check_convex(g, lo, hi)?;
    let g_star = |y: f64| conjugate_at(g, lo, hi, y).0;
    Ok(x_grid.iter().map(|&x| conjugate_at(&g_star, y_range.0, y_range.1, x).0).collect())
}

/// `max_{x, y} (xy − g(x) − g*(y))` over `x_grid` and the slopes of `conj`;
/// never positive by the Fenchel–Young inequality.
pub fn fenchel_young_gap(g: &dyn Fn(f64) -> f64, conj: &Conjugate, x_grid: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for &x in x_grid {
        let gx = g(x);
        for (y, gs) in conj.y.iter().zip(&conj.value) {
            worst = worst.max(x * y - gx - gs);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_self_dual() {
        let g = |x: f64| 0.5 * x * x;
        let ys: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.2).collect();
        let c = convex_conjugate(&g, (-10.0, 10.0), &ys).unwrap();
        for (y, v) in c.y.iter().zip(&c.value) {
            assert!((v - 0.5 * y * y).abs() < 1e-12);
        }
    }

    #[test]
    fn nonconvex_rejected() {
        let g = |x: f64| x.sin();
        assert!(matches!(convex_conjugate(&g, (0.0, 3.0), &[0.5]), Err(Error::Precondition(_))));
    }
}
