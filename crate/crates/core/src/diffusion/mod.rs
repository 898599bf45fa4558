//! Ornstein–Uhlenbeck diffusions with generator `½σ²Δ − a x·∇`, their
//! bridges, and Monte Carlo estimators for Feynman–Kac semigroups
//! `P_t^V f(x) = E_x[f(X_t) exp(−∫₀ᵗ V(X_s) ds)]`.

mod fk;
mod htransform;
mod ou;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use fk::{
    a_statistic, fd_grad_log_fk, fd_hess_log_fk, feynman_kac_apply, grad_log_fk, hess_log_fk, hess_log_fk_alt,
    simulate_paths, FkEstimate, FkPathBatch, GradEstimate, HessEstimate, PathSpec, Want, CHUNK_SIZE,
};
pub use htransform::{
    curvature_bounds, h_transform, hess_lower_bound, lh_apply, lh_hess_log, HTilt, HTransform, HTransformPotential, Potential1D,
};
pub use ou::{ou_log_derivative, ou_mehler_apply, sample_ou_bridge, sample_ou_path, LogDerivatives, QuadratureValue};

/// `dX = −aX dt + σ dB` in dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OUParams {
    pub a: f64,
    pub sigma: f64,
    pub dim: usize,
}

impl OUParams {
    pub fn new(a: f64, sigma: f64, dim: usize) -> Result<Self> {
        if !(a > 0.0) || !(sigma > 0.0) || !a.is_finite() || !sigma.is_finite() || dim == 0 || dim > 2 {
            return Err(domain(format!("OUParams(a={a}, σ={sigma}, dim={dim})")));
        }
        Ok(OUParams { a, sigma, dim })
    }

    /// `a = 1`, `σ = √2`: generator `Δ − x·∇`, invariant law `N(0, I)`.
    pub fn standard(dim: usize) -> Self {
        OUParams { a: 1.0, sigma: std::f64::consts::SQRT_2, dim }
    }

    /// `e^{−at}`.
    pub fn decay(&self, t: f64) -> f64 {
        (-self.a * t).exp()
    }

    /// `σ²(1 − e^{−2at})/(2a)`.
    pub fn variance(&self, t: f64) -> f64 {
        -self.sigma * self.sigma * (-2.0 * self.a * t).exp_m1() / (2.0 * self.a)
    }

    /// `e^{−at}/√v_t`.
    pub fn c_t(&self, t: f64) -> f64 {
        self.decay(t) / self.variance(t).sqrt()
    }

    /// `2a e^{−at} / (σ²(1 − e^{−2at}))`.
    pub fn d_t(&self, t: f64) -> f64 {
        self.decay(t) / self.variance(t)
    }

    /// `sinh(a(t−s))/sinh(at)`.
    pub fn alpha(&self, t: f64, s: f64) -> f64 {
        let a = self.a;
        ((-a * s).exp() - (-a * (2.0 * t - s)).exp()) / -(-2.0 * a * t).exp_m1()
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(domain(format!("time must be positive, got {t}")));
        }
        Ok(())
    }
}

/// A potential `V` with gradient and Hessian (row-major).
pub trait Potential: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    fn hessian(&self, x: &[f64], out: &mut [f64]);
    /// A finite lower bound when `V` is bounded below.
    fn lower_bound(&self) -> Option<f64>;
}

pub(crate) fn check_admissible(v: &dyn Potential) -> Result<()> {
    match v.lower_bound() {
        Some(b) if b.is_finite() => Ok(()),
        _ => Err(Error::Inadmissible("potential is not known to be bounded below".into())),
    }
}

/// `V ≡ 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroPotential {
    pub dim: usize,
}

impl Potential for ZeroPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn gradient(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn hessian(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `V(x) = ½ k |x|² + c` with `k ≥ 0`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticPotential {
    pub dim: usize,
    pub k: f64,
    pub c: f64,
}

impl Potential for QuadraticPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.k * x.iter().map(|v| v * v).sum::<f64>() + self.c
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = self.k * v;
        }
    }
    fn hessian(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for i in 0..self.dim {
            out[i * self.dim + i] = self.k;
        }
    }
    fn lower_bound(&self) -> Option<f64> {
        (self.k >= 0.0).then_some(self.c)
    }
}

/// `V(x) = b·x`; not bounded below.
#[derive(Debug, Clone)]
pub struct LinearPotential {
    pub slope: Vec<f64>,
}

impl Potential for LinearPotential {
    fn dim(&self) -> usize {
        self.slope.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.slope).map(|(a, b)| a * b).sum()
    }
    fn gradient(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.slope);
    }
    fn hessian(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn lower_bound(&self) -> Option<f64> {
        None
    }
}

/// A positive function given through `ln f` and, optionally, its
/// gradient and Hessian.
pub trait PositiveFn: Sync {
    fn ln_value(&self, x: &[f64]) -> f64;
    fn grad_ln(&self, _x: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("gradient of ln f not available".into()))
    }
    fn hess_ln(&self, _x: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("Hessian of ln f not available".into()))
    }
}

/// `f(x) = scale · exp(−|x − center|²/(2 width²))`.
#[derive(Debug, Clone)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub width: f64,
    pub scale: f64,
}

impl GaussianBump {
    pub fn new(center: Vec<f64>, width: f64) -> Self {
        GaussianBump { center, width, scale: 1.0 }
    }
}

impl PositiveFn for GaussianBump {
    fn ln_value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        self.scale.ln() - r2 / (2.0 * self.width * self.width)
    }
    fn grad_ln(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let w2 = self.width * self.width;
        for ((o, a), c) in out.iter_mut().zip(x).zip(&self.center) {
            *o = -(a - c) / w2;
        }
        Ok(())
    }
    fn hess_ln(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let d = x.len();
        out.fill(0.0);
        for i in 0..d {
            out[i * d + i] = -1.0 / (self.width * self.width);
        }
        Ok(())
    }
}

/// `f ≡ 1`.
#[derive(Debug, Clone, Copy)]
pub struct Unit;

impl PositiveFn for Unit {
    fn ln_value(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn grad_ln(&self, _x: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
    fn hess_ln(&self, _x: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
}

/// `ln f` given by a closure, without derivatives.
pub struct LnFn<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Sync> PositiveFn for LnFn<F> {
    fn ln_value(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_constants() {
        let p = OUParams::standard(1);
        let t = 0.7f64;
        let c = (-t).exp() / (1.0 - (-2.0 * t).exp()).sqrt();
        assert!((p.c_t(t) - c).abs() < 1e-14);
        assert!((p.d_t(t) * p.decay(t) - c * c).abs() < 1e-13);
        let s = 0.3;
        assert!((p.alpha(t, s) - (t - s).sinh() / t.sinh()).abs() < 1e-15);
        assert!(p.alpha(t, t).abs() < 1e-16);
    }
}
