//! Bracketing root finders and a golden-section maximizer.

use crate::error::{Error, Result};

/// Root of `f` on a sign-changing bracket `[a, b]`: bisection until the
/// bracket is small, then Illinois-safeguarded secant steps.
pub fn bisect_secant<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a.min(b), a.max(b));
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::SearchRange(format!("no sign change on [{a}, {b}]")));
    }
    let width0 = b - a;
    let mut side = 0i8;
    for _ in 0..400 {
        let scale = a.abs().max(b.abs()).max(1.0);
        if b - a <= tol * scale {
            break;
        }
        let x = if b - a > 1e-3 * width0.max(scale * 1e-6) {
            0.5 * (a + b)
        } else {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a && s < b {
                s
            } else {
                0.5 * (a + b)
            }
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_nan() {
            return Err(Error::Accuracy(format!("NaN during root search at {x}")));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Solve `f(x) = y` for increasing `f` with `f(lo) ≤ y`, expanding the
/// upper end of the bracket geometrically.
pub fn invert_increasing<F: Fn(f64) -> f64>(f: F, lo: f64, y: f64, tol: f64) -> Result<f64> {
    let flo = f(lo);
    if flo == y {
        return Ok(lo);
    }
    if flo > y {
        return Err(Error::SearchRange(format!("f({lo}) = {flo} exceeds target {y}")));
    }
    let mut step = lo.abs().max(1.0);
    let mut hi = lo + step;
    while f(hi) < y {
        step *= 2.0;
        hi = lo + step;
        if !hi.is_finite() || step > 1e300 {
            return Err(Error::SearchRange(format!("no upper bracket for target {y}")));
        }
    }
    bisect_secant(|x| f(x) - y, lo, hi, tol)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
