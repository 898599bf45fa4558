//! Kernel supremum used for the Laguerre tail bound.

use semilab::laguerre::{kernel_sup, laguerre_apply, ln_laguerre_kernel, ln_laguerre_kernel_at_origin, LaguerreKernelParams};
use semilab::tail::grid;

#[test]
fn kernel_sup_dominates_a_dense_scan() {
    for &alpha in &[0.5, 1.0, 1.5, 3.0] {
        let params = LaguerreKernelParams::new(alpha, 1.0).unwrap();
        for &x in &[1e-3, 0.1, 1.0, 5.0, 40.0] {
            let (ln_sup, arg) = kernel_sup(&params, x).unwrap();
            let scan = grid(1e-10, 1e4, 20_000, true)
                .into_iter()
                .map(|y| ln_laguerre_kernel(&params, x, y).unwrap())
                .fold(ln_laguerre_kernel_at_origin(&params, x), f64::max);
            assert!(ln_sup >= scan - 1e-12, "α={alpha}, x={x}: sup {ln_sup} below scan {scan}");
            assert!(ln_sup - scan <= 1e-5, "α={alpha}, x={x}: sup {ln_sup} far above scan {scan}");
            if arg > 0.0 {
                assert!((ln_laguerre_kernel(&params, x, arg).unwrap() - ln_sup).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn kernel_is_a_probability_density() {
    for &alpha in &[0.5, 1.0, 1.5, 3.0] {
        for &t in &[0.1, 1.0, 3.0] {
            let params = LaguerreKernelParams::new(alpha, t).unwrap();
            for &x in &[0.05, 1.0, 7.0] {
                let total = laguerre_apply(&params, &|_| 1.0, x, 1e-10).unwrap();
                assert!((total - 1.0).abs() <= 1e-8, "α={alpha}, t={t}, x={x}: mass {total}");
                // mean of Y_t is x e^{−t} + α(1 − e^{−t})
                let mean = laguerre_apply(&params, &|y| y, x, 1e-10).unwrap();
                let want = x * (-t).exp() + alpha * (1.0 - (-t).exp());
                assert!((mean - want).abs() <= 1e-8 * (1.0 + want));
            }
        }
    }
}
