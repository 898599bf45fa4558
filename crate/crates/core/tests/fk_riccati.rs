//! Feynman–Kac estimators against the log-quadratic solution for a
//! quadratic potential and a Gaussian bump.
//!
//! With `V = k x²/2 + c` and `ln f = −(x − m)²/(2w²)`, `ln P_t^V f` stays
//! quadratic, `−A x²/2 + B x + C`, with
//! `A' = −σ²A² − 2aA + k`, `B' = −σ²AB − aB`, `C' = σ²(B² − A)/2 − c`.

use std::f64::consts::SQRT_2;

use semilab::diffusion::{
    feynman_kac_apply, grad_log_fk, hess_log_fk, hess_log_fk_alt, GaussianBump, OUParams, PathSpec, QuadraticPotential,
};
use semilab::seed::seed_derive;

const A_RATE: f64 = 1.0;
const K: f64 = 0.5;
const C: f64 = -0.5;
const CENTER: f64 = 0.3;
const WIDTH: f64 = 0.8;

fn riccati(t: f64) -> [f64; 3] {
    let s2 = 2.0;
    let rhs = |y: [f64; 3]| {
        let [a, b, _] = y;
        [-s2 * a * a - 2.0 * A_RATE * a + K, -s2 * a * b - A_RATE * b, 0.5 * s2 * (b * b - a) - C]
    };
    let w2 = WIDTH * WIDTH;
    let mut y = [1.0 / w2, CENTER / w2, -CENTER * CENTER / (2.0 * w2)];
    let n = 100_000;
    let h = t / n as f64;
    let add = |y: [f64; 3], k: [f64; 3], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]];
    for _ in 0..n {
        let k1 = rhs(y);
        let k2 = rhs(add(y, k1, 0.5 * h));
        let k3 = rhs(add(y, k2, 0.5 * h));
        let k4 = rhs(add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

#[test]
fn estimators_match_the_riccati_solution() {
    let params = OUParams::new(A_RATE, SQRT_2, 1).unwrap();
    let v = QuadraticPotential { dim: 1, k: K, c: C };
    let f = GaussianBump::new(vec![CENTER], WIDTH);
    for (i, &(x, t)) in [(0.4, 1.0), (-1.2, 2.0)].iter().enumerate() {
        let [a, b, c] = riccati(t);
        let spec = |role: &str| PathSpec::new(200_000, seed_derive(99, &[role, &i.to_string()]));

        let value = feynman_kac_apply(&params, &v, &f, t, &[x], &spec("value")).unwrap();
        let want = (c - 0.5 * a * x * x + b * x).exp();
        assert!((value.value - want).abs() <= 4.0 * value.se, "P_t^V f: {} ± {} vs {want}", value.value, value.se);

        let grad = grad_log_fk(&params, &v, &f, t, &[x], &spec("grad")).unwrap();
        let want = -a * x + b;
        assert!((grad.value[0] - want).abs() <= 4.0 * grad.se[0], "gradient: {} ± {} vs {want}", grad.value[0], grad.se[0]);

        for (name, est) in [
            ("A-statistic", hess_log_fk(&params, &v, &f, t, &[x], &spec("hess")).unwrap()),
            ("B-covariance", hess_log_fk_alt(&params, &v, &f, t, &[x], &spec("alt")).unwrap()),
        ] {
            let (h, se) = est.at(0, 0);
            assert!((h + a).abs() <= 4.0 * se, "{name} Hessian: {h} ± {se} vs {}", -a);
        }
    }
}
