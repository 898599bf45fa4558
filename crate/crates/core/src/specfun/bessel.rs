//! Modified Bessel function of the first kind, `I_ν(x)`, for `ν > −1`, `x ≥ 0`.

use super::{ln_gamma, Accuracy, LogSum};
use crate::error::{Error, Result};

const ASYMPTOTIC_FROM: f64 = 50.0;

/// `ln I_ν(x)`.
///
/// Power series summed in log space for moderate arguments; the Hankel
/// asymptotic expansion once `x ≥ 50` and `x > 4ν²`.
pub fn ln_bessel_i(order: f64, x: f64, acc: Accuracy) -> Result<f64> {
    if !(order > -1.0) || !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_i(order={order}, x={x})")));
    }
    if x == 0.0 {
        return if order == 0.0 {
            Ok(0.0)
        } else if order > 0.0 {
            Ok(f64::NEG_INFINITY)
        } else {
            Err(Error::Range(format!("I_{order}(0) is infinite")))
        };
    }
    if x >= ASYMPTOTIC_FROM && x > 4.0 * order * order {
        if let Some(v) = asymptotic(order, x) {
            return Ok(v);
        }
    }
    series(order, x, acc)
}

/// `I_ν(x)`; a [`Error::Range`] error if it overflows.
pub fn bessel_i(order: f64, x: f64, acc: Accuracy) -> Result<f64> {
    let l = ln_bessel_i(order, x, acc)?;
    let v = l.exp();
    if v.is_infinite() {
        return Err(Error::Range(format!("I_{order}({x}) overflows")));
    }
    Ok(v)
}

fn series(order: f64, x: f64, acc: Accuracy) -> Result<f64> {
    let lead = order * (0.5 * x).ln() - ln_gamma(order + 1.0);
    let lq = 2.0 * (0.5 * x).ln();
    let mut sum = LogSum::default();
    let mut lt = 0.0;
    sum.add(lt);
    let peak = 0.5 * x;
    for n in 1..=acc.max_terms {
        let nf = n as f64;
        lt += lq - nf.ln() - (nf + order).ln();
        sum.add(lt);
        if nf > peak && lt - sum.value() < acc.rel_tol.max(1e-17).ln() - 2.0 {
            return Ok(lead + sum.value());
        }
    }
    Err(Error::Accuracy(format!("bessel series for x = {x} exceeded {} terms", acc.max_terms)))
}

fn asymptotic(order: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * order * order;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
    }
    if !(sum > 0.0) {
        return None;
    }
    Some(x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half(x: f64) -> f64 {
        (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sinh()
    }

    #[test]
    fn half_order_closed_form() {
        for &x in &[0.1, 1.0, 5.0, 29.0, 30.0, 31.0] {
            let v = bessel_i(0.5, x, Accuracy::default()).unwrap();
            assert!((v - half(x)).abs() <= 1e-13 * half(x), "x = {x}");
        }
    }

    #[test]
    fn asymptotic_branch_is_continuous() {
        for &nu in &[-0.5, 0.0, 0.5, 2.0] {
            let a = series(nu, 60.0, Accuracy::default()).unwrap();
            let b = asymptotic(nu, 60.0).unwrap();
            assert!((a - b).abs() < 1e-13 * a.abs(), "nu = {nu}");
        }
    }

    #[test]
    fn zero_argument() {
        assert_eq!(ln_bessel_i(0.0, 0.0, Accuracy::default()).unwrap(), 0.0);
        assert_eq!(bessel_i(1.5, 0.0, Accuracy::default()).unwrap(), 0.0);
        assert!(bessel_i(-0.5, 0.0, Accuracy::default()).is_err());
    }

    #[test]
    fn overflow_reported() {
        assert!(matches!(bessel_i(0.0, 800.0, Accuracy::default()), Err(Error::Range(_))));
        assert!(ln_bessel_i(0.0, 800.0, Accuracy::default()).unwrap().is_finite());
    }
}
