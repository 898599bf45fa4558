//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero if any fails.
//!
//! Expected values come from oracles written here, independently of the
//! library routines they check.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semilab::deviation::{
    check_semiconvex_sup_bound, deviation_bound_diffusion, poisson_counterexample, semiconvex_corpus, HMeasure,
};
use semilab::diffusion::{
    fd_hess_log_fk, hess_log_fk, ou_log_derivative, sample_ou_bridge, GaussianBump, OUParams, PathSpec,
    Potential1D, QuadraticPotential, ZeroPotential,
};
use semilab::discrete::{
    delta_log, mm_talagrand_tail, optimality_witness, poisson_delta_log, psi_s_auto, FuncOnN, MMParams, MmKernel,
};
use semilab::harness::{self, table_csv, ExperimentConfig, REGISTRY};
use semilab::laguerre::{
    gamma_counterexample, laguerre_apply, laguerre_kernel, laguerre_poly, laguerre_talagrand_tail,
    ln_laguerre_kernel, log_hess_32, log_hess_unboundedness, LaguerreKernelParams,
};
use semilab::seed::seed_derive;
use semilab::specfun::{alpha_integral, bessel_i, stirling_envelope, Accuracy};
use semilab::tail::{grid, log_envelope, loglog_envelope};

// ---------------------------------------------------------------- oracles

/// Neumaier-compensated sum.
#[derive(Default)]
struct Kahan {
    s: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }
    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `eps`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, eps, 30)
}

/// Simpson over consecutive pieces.
fn simpson_pieces(f: &dyn Fn(f64) -> f64, pts: &[f64], eps: f64) -> f64 {
    pts.windows(2).map(|w| simpson(f, w[0], w[1], eps / pts.len() as f64)).sum()
}

/// `ln k!` by compensated cumulative summation.
fn ln_fact_table(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Kahan::default();
    out.push(0.0);
    for k in 1..=n {
        acc.add((k as f64).ln());
        out.push(acc.value());
    }
    out
}

fn pois(theta: f64, k: usize, lf: &[f64]) -> f64 {
    (-theta + k as f64 * theta.ln() - lf[k]).exp()
}

fn binom(n: usize, p: f64, i: usize, lf: &[f64]) -> f64 {
    if i > n {
        return 0.0;
    }
    (lf[n] - lf[i] - lf[n - i] + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp()
}

/// `P(X_s = n | X_0 = k)` for the M/M/∞ queue with `λ = μ = 1`, directly.
fn mm_prob(s: f64, k: usize, n: usize, lf: &[f64]) -> f64 {
    let p = (-s).exp();
    let q = 1.0 - p;
    (0..=n.min(k)).map(|i| binom(k, p, i, lf) * pois(q, n - i, lf)).sum()
}

/// `Ψ_s(n) = e · max_k P(X_s = n | X_0 = k)` by scanning `k ≤ k_max`.
fn psi_direct(s: f64, n: usize, k_max: usize, lf: &[f64]) -> f64 {
    std::f64::consts::E * (0..=k_max).map(|k| mm_prob(s, k, n, lf)).fold(0.0, f64::max)
}

/// Generalized Laguerre `L_k^{(a)}` by the three-term recurrence.
fn laguerre_rec(a: f64, k: usize, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + a - x);
    if k == 0 {
        return l0;
    }
    for j in 1..k {
        let jf = j as f64;
        let l2 = ((2.0 * jf + 1.0 + a - x) * l1 - (jf + a) * l0) / (jf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Digamma by upward recurrence and the asymptotic series.
fn digamma_oracle(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + x.ln() - 0.5 / x - x2 * (1.0 / 12.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 252.0 - x2 / 240.0)))
}

/// Standard normal upper tail `P(Z > a)` for `a ≥ 0` by quadrature.
fn normal_upper(a: f64) -> f64 {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let pts: Vec<f64> = (0..=40).map(|i| a + i as f64 * 0.5).collect();
    simpson_pieces(&phi, &pts, (phi(a) * 1e-12).max(1e-300))
}

// ------------------------------------------------------------- reporting

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, n: u32, name: &str, pass: bool, start: Instant, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} [{name}]: {verdict} ({:.1}s) {detail}", start.elapsed().as_secs_f64());
        if !pass {
            self.failed.push(n);
        }
    }
}

// ------------------------------------------------------------- criteria

fn c1(r: &mut Report) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut generic = 0.0f64;
    for &theta in &[0.5, 1.0, 2.0] {
        for n in 1..=1000u64 {
            let want = (n as f64 / (n + 1) as f64).ln();
            worst = worst.max((poisson_delta_log(theta, n).unwrap() - want).abs());
            if n <= 50 {
                let f = FuncOnN::from_log(move |k| semilab::discrete::ln_poisson_pmf(theta, k), 1.0, 0.0);
                generic = generic.max((delta_log(&f, n).unwrap() - want).abs());
            }
        }
    }
    let pass = worst <= 1e-12 && generic <= 1e-12;
    r.line(1, "poisson-identity", pass, start, format!("max |Δlog π − ln(n/(n+1))| = {worst:.2e}; generic Δlog (n ≤ 50) {generic:.2e}"));
}

fn c2(r: &mut Report) {
    let start = Instant::now();
    let support = 80u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed_derive(2024, &["acceptance", "c2"]));
    let corpus: Vec<Vec<f64>> = (0..100)
        .map(|_| {
            let mut v: Vec<f64> = (0..=support)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-11.5..11.5f64).exp() })
                .collect();
            if v.iter().all(|&x| x == 0.0) {
                v[0] = 1.0;
            }
            v
        })
        .collect();
    let funcs: Vec<FuncOnN> = corpus
        .iter()
        .map(|v| {
            let v = v.clone();
            FuncOnN::with_support(move |k| v.get(k as usize).copied().unwrap_or(0.0), support)
        })
        .collect();
    let lf = ln_fact_table(400);
    let (mut violations, mut checked, mut min_margin) = (0usize, 0usize, f64::INFINITY);
    let mut oracle_err = 0.0f64;
    for &rho in &[0.5, 1.0, 2.0] {
        for &t in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            let params = MMParams::with_rho(rho, t).unwrap();
            let p = (-t).exp();
            let bound = ((1.0 - (p / (p + rho * (1.0 - p).powi(2))).powi(2)) / 12.0).ln();
            let kernel = MmKernel::new(params, 201, 201 + 64);
            for (fi, f) in funcs.iter().enumerate() {
                let ln_pf = kernel.ln_apply(f).unwrap();
                for n in 1..=200usize {
                    let v = ln_pf[n + 1] + ln_pf[n - 1] - 2.0 * ln_pf[n];
                    checked += 1;
                    min_margin = min_margin.min(v - bound);
                    if v < bound - 1e-12 {
                        violations += 1;
                    }
                }
                // direct linear-space convolution at a few n
                if fi % 25 == 0 {
                    let theta = rho * (1.0 - p);
                    for &n in &[0usize, 7, 60, 200] {
                        let mut acc = Kahan::default();
                        for (k, &fk) in corpus[fi].iter().enumerate() {
                            if fk == 0.0 {
                                continue;
                            }
                            let pk: f64 = (0..=n.min(k)).map(|i| binom(n, p, i, &lf) * pois(theta, k - i, &lf)).sum();
                            acc.add(fk * pk);
                        }
                        oracle_err = oracle_err.max((acc.value().ln() - ln_pf[n]).abs());
                    }
                }
            }
        }
    }
    let pass = violations == 0 && oracle_err < 1e-10;
    r.line(
        2,
        "mm-semi-log-convexity",
        pass,
        start,
        format!("{violations} violations in {checked} checks; min margin {min_margin:.3e}; kernel vs direct sum {oracle_err:.1e}"),
    );
}

fn c3(r: &mut Report) {
    let start = Instant::now();
    let s = LN_2;
    let es = s.exp();
    let vals: Vec<f64> = (1..=10_000u64).map(|n| (n as f64).sqrt() * psi_s_auto(s, n).unwrap().psi).collect();
    let c_meas = vals.iter().copied().fold(0.0, f64::max);
    let mut lower_bad = 0;
    let mut lattice = 0;
    for (i, &v) in vals.iter().enumerate() {
        let ne = (i + 1) as f64 * es;
        if (ne - ne.round()).abs() < 1e-9 * ne {
            lattice += 1;
            if v < 1.0 / 9.0 - 1e-9 {
                lower_bad += 1;
            }
        }
    }
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    // direct scan oracle for small n
    let lf = ln_fact_table(2000);
    let mut oracle = 0.0f64;
    for n in [1usize, 2, 3, 5, 10, 25, 60, 120] {
        let want = psi_direct(s, n, 8 * n + 80, &lf);
        let got = psi_s_auto(s, n as u64).unwrap().psi;
        oracle = oracle.max((got - want).abs() / want);
    }
    let pass = lower_bad == 0 && lattice == 10_000 && c_meas.is_finite() && oracle < 1e-10;
    r.line(
        3,
        "psi-scaling",
        pass,
        start,
        format!("√nΨ ∈ [{min:.6}, C_meas = {c_meas:.6}] over n ≤ 10⁴ ({lattice} lattice points, {lower_bad} below 1/9); direct scan rel err {oracle:.1e}"),
    );
}

fn c4(r: &mut Report) {
    let start = Instant::now();
    let ts = grid(4.0, 1e12, 41, true);
    let lf = ln_fact_table(2000);
    let mut pass = true;
    let mut detail = Vec::new();
    for &s in &[0.5, 1.0] {
        let c_prep = (1..=2000u64).map(|n| (n as f64).sqrt() * psi_s_auto(s, n).unwrap().psi).fold(0.0, f64::max);
        let tt = mm_talagrand_tail(s, &ts, c_prep).unwrap();
        // tail oracle: v_n = n! Ψ_s(n) from the direct scan for n ≤ 40
        let ln_v: Vec<f64> = (0..=40usize).map(|n| lf[n] + psi_direct(s, n, 8 * n + 120, &lf).ln()).collect();
        let mut oracle = 0.0f64;
        for (i, &t) in ts.iter().enumerate() {
            let mut acc = Kahan::default();
            for n in 0..=40usize {
                if ln_v[n] >= t.ln() {
                    acc.add(pois(1.0, n, &lf));
                }
            }
            let mut tail_rest = Kahan::default();
            for n in 41..400usize {
                tail_rest.add(pois(1.0, n, &lf));
            }
            let want = acc.value() + tail_rest.value();
            oracle = oracle.max((tt.curve.tail[i] - want).abs() / want);
        }
        let fitted_ok = ts.iter().enumerate().all(|(i, &t)| tt.curve.tail[i] <= tt.fitted_c * loglog_envelope(t) * (1.0 + 1e-12));
        let proof_ok = tt.proof_bound.iter().zip(&tt.curve.tail).all(|(b, &tail)| b.is_none_or(|b| tail <= b));
        let last = tt.curve.tail.last().unwrap() / loglog_envelope(*ts.last().unwrap());
        pass &= fitted_ok && proof_ok && oracle < 1e-9 && tt.fitted_c.is_finite();
        detail.push(format!(
            "s={s}: c = {:.4} (ratio at 1e12 {last:.4}), C = {c_prep:.4}, proof envelope {}, oracle rel err {oracle:.1e}",
            tt.fitted_c,
            if proof_ok { "holds" } else { "VIOLATED" }
        ));
    }
    let mut worst_gap = f64::INFINITY;
    for k in 3..=50u64 {
        let w = optimality_witness(k).unwrap();
        // {n : λn ≥ λk} = {n ≥ k}
        let want: f64 = {
            let mut acc = Kahan::default();
            for n in k as usize..400 {
                acc.add(pois(1.0, n, &lf));
            }
            acc.value()
        };
        pass &= (w.tail - want).abs() <= 1e-12 * want;
        worst_gap = worst_gap.min(w.lhs - w.rhs);
    }
    pass &= worst_gap >= -1e-9;
    detail.push(format!("optimality min(lhs − rhs) over k = 3..50: {worst_gap:.4e}"));
    r.line(4, "mm-talagrand", pass, start, detail.join("; "));
}

/// `Hess ln P_t^V f` for `V = k x²/2 + c` and a Gaussian bump `f`, from the
/// Riccati system of the log-quadratic solution.
fn riccati_hess(a: f64, sigma: f64, k: f64, width: f64, t: f64) -> f64 {
    let mut aa = 1.0 / (width * width);
    let n = 200_000;
    let h = t / n as f64;
    let rhs = |x: f64| -sigma * sigma * x * x - 2.0 * a * x + k;
    for _ in 0..n {
        let k1 = rhs(aa);
        let k2 = rhs(aa + 0.5 * h * k1);
        let k3 = rhs(aa + 0.5 * h * k2);
        let k4 = rhs(aa + h * k3);
        aa += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    -aa
}

fn c5(r: &mut Report) {
    let start = Instant::now();
    let params = OUParams::new(1.0, SQRT_2, 1).unwrap();
    let v = QuadraticPotential { dim: 1, k: 0.5, c: -0.5 };
    let f = GaussianBump::new(vec![0.3], 0.8);
    let points = [(-0.5, 0.3), (0.0, 0.5), (0.4, 1.0), (1.0, 1.5), (-1.2, 2.0)];
    let n_paths = 1_000_000;
    let mut pass = true;
    let mut zs = Vec::new();
    let mut zr = Vec::new();
    for (i, &(x, t)) in points.iter().enumerate() {
        let mc = hess_log_fk(&params, &v, &f, t, &[x], &PathSpec::new(n_paths, seed_derive(5, &["mc", &i.to_string()])))
            .unwrap()
            .at(0, 0);
        let fd = fd_hess_log_fk(&params, &v, &f, t, &[x], &PathSpec::new(n_paths, seed_derive(5, &["fd", &i.to_string()])))
            .unwrap()
            .at(0, 0);
        let z = (mc.0 - fd.0) / (mc.1 * mc.1 + fd.1 * fd.1).sqrt();
        pass &= z.abs() <= 3.0;
        zs.push(z);
        zr.push((mc.0 - riccati_hess(1.0, SQRT_2, 0.5, 0.8, t)) / mc.1);
    }
    let zero = ZeroPotential { dim: 1 };
    let g = |y: f64| (-(y - 0.3f64).powi(2) / (2.0 * 0.64)).exp();
    let mut z0 = Vec::new();
    for (i, &(x, t)) in points.iter().enumerate() {
        let mc = hess_log_fk(&params, &zero, &f, t, &[x], &PathSpec::new(n_paths, seed_derive(5, &["zero", &i.to_string()])))
            .unwrap()
            .at(0, 0);
        let quad = ou_log_derivative(&params, &g, t, x, 120).unwrap().u2;
        let z = (mc.0 - quad) / mc.1;
        pass &= z.abs() <= 3.0;
        z0.push(z);
    }
    let fmt = |v: &[f64]| v.iter().map(|z| format!("{z:+.2}")).collect::<Vec<_>>().join(" ");
    r.line(
        5,
        "fk-hessian",
        pass,
        start,
        format!("MC vs CRN-FD z = [{}]; V≡0 MC vs quadrature z = [{}]; (info) MC vs Riccati z = [{}]", fmt(&zs), fmt(&z0), fmt(&zr)),
    );
}

fn c6(r: &mut Report) {
    let start = Instant::now();
    let params = OUParams::new(1.0, SQRT_2, 1).unwrap();
    let (t, x, y) = (1.0, 1.7, -0.4);
    let times: Vec<f64> = (0..100).map(|i| i as f64 * t / 100.0).collect();
    let mut worst = 0.0f64;
    for p in 0..1000 {
        let seed = seed_derive(6, &["bridge", &p.to_string()]);
        let a = sample_ou_bridge(&params, &[x], &[y], t, &times, seed).unwrap();
        let b = sample_ou_bridge(&params, &[0.0], &[y], t, &times, seed).unwrap();
        for (j, &s) in times.iter().enumerate() {
            let alpha = (t - s).sinh() / t.sinh();
            worst = worst.max((a[j][0] - b[j][0] - alpha * x).abs());
        }
    }
    r.line(6, "bridge-linearity", worst < 1e-12, start, format!("max |Y^x − Y^0 − α_t(s)x| = {worst:.2e} over 1000 paths"));
}

fn c7(r: &mut Report) {
    let start = Instant::now();
    let mut q_err = 0.0f64;
    let mut max_val = 0.0f64;
    for &a in &[1.0, 0.7] {
        for t in grid(1e-3, 20.0, 60, true) {
            let f = |s: f64| ((a * (t - s)).sinh() / (a * t).sinh()).powi(2);
            let want = simpson(&f, 0.0, t, 1e-15 * t);
            let got = alpha_integral(a, t).unwrap();
            q_err = q_err.max((got - want).abs() / want);
        }
    }
    for i in 1..=20_000 {
        let t = 20.0 * i as f64 / 20_000.0;
        max_val = max_val.max(alpha_integral(1.0, t).unwrap());
    }
    let table = ln_fact_table(1_000_000);
    let (mut env_ok, mut lf_err) = (true, 0.0f64);
    for n in 1..=1_000_000u64 {
        let (lo, lf, hi) = stirling_envelope(n);
        let exact = table[n as usize];
        env_ok &= lo <= exact && exact <= hi;
        lf_err = lf_err.max((lf - exact).abs() / exact.max(1.0));
    }
    let mut i_err = 0.0f64;
    for x in grid(0.1, 30.0, 300, false) {
        let closed = (2.0 / (PI * x)).sqrt() * x.sinh();
        i_err = i_err.max((bessel_i(0.5, x, Accuracy::default()).unwrap() - closed).abs() / closed);
    }
    let mut k_err = 0.0f64;
    for &t in &[0.3, 1.0, 2.5] {
        let params = LaguerreKernelParams::new(1.5, t).unwrap();
        let em1 = t.exp_m1();
        for &x in &[0.2, 1.0, 4.0] {
            for &y in &[0.1, 0.9, 6.0] {
                let z = 2.0 * (x * y * t.exp()).sqrt() / em1;
                let i_half = (2.0 / (PI * z)).sqrt() * z.sinh();
                let closed = (PI.sqrt() / 2.0) * (t.exp() / em1) * (t.exp() / (x * y)).powf(0.25) * (-(x + y) / em1).exp() * i_half;
                let got = laguerre_kernel(&params, x, y).unwrap();
                k_err = k_err.max((got - closed).abs() / closed);
            }
        }
    }
    let pass = q_err <= 1e-10 && max_val <= 0.5 && env_ok && lf_err < 1e-12 && i_err <= 1e-10 && k_err <= 1e-10;
    r.line(
        7,
        "closed-forms",
        pass,
        start,
        format!(
            "alpha_integral vs quadrature {q_err:.1e}, max on (0,20] {max_val:.12}; Stirling envelope {} (ln n! err {lf_err:.1e}); I_1/2 {i_err:.1e}; kernel α=3/2 {k_err:.1e}",
            if env_ok { "holds" } else { "FAILS" }
        ),
    );
}

fn c8(r: &mut Report) {
    let start = Instant::now();
    let ts = grid(2.0, 1e6, 49, true);
    let xs = grid(-8.0, 8.0, 161, false);
    let mut pass = true;
    let (mut tail_v, mut sup_v, mut shape_v) = (0usize, 0usize, 0usize);
    let mut max_ratio = 0.0f64;
    let mut oracle = 0.0f64;
    for h in [Potential1D::Gaussian, Potential1D::GaussianPlusBracket { p: 1.0 }] {
        let mu = HMeasure::new(h).unwrap();
        let hf = |x: f64| x * x / 2.0 + if matches!(h, Potential1D::Gaussian) { 0.0 } else { (1.0 + x * x).sqrt() };
        let pts: Vec<f64> = (-30..=30).map(|i| i as f64 * 0.5).collect();
        let z_h = simpson_pieces(&|x| (-hf(x)).exp(), &pts, 1e-12);
        for &beta in &[0.0, 1.0, 5.0] {
            let corpus = semiconvex_corpus(77, beta, 100);
            for (fi, g) in corpus.iter().enumerate() {
                // second differences of ln g against −β
                let hh = 1e-3;
                for i in 0..=400 {
                    let x = -10.0 + 0.05 * i as f64;
                    let d2 = (g.ln_value(x + hh) + g.ln_value(x - hh) - 2.0 * g.ln_value(x)) / (hh * hh);
                    if d2 < -beta - 1e-4 * (1.0 + beta) {
                        shape_v += 1;
                    }
                }
                let curve = deviation_bound_diffusion(&mu, g, &ts).unwrap();
                tail_v += curve.violations(1e-9).len();
                max_ratio = max_ratio.max(curve.max_ratio());
                sup_v += check_semiconvex_sup_bound(&mu, g, &xs).unwrap().violations;
                if fi == 0 {
                    // extremal member: e^x (β = 0) or e^{−βx²/2}
                    let ln_g0 = |x: f64| if beta == 0.0 { x } else { -0.5 * beta * x * x };
                    let norm = simpson_pieces(&|x| (ln_g0(x) - hf(x)).exp(), &pts, 1e-12) / z_h;
                    for (i, &t) in ts.iter().enumerate() {
                        let level = t.ln() + norm.ln();
                        let want = if beta == 0.0 {
                            // {x ≥ level}
                            if matches!(h, Potential1D::Gaussian) {
                                normal_upper(level)
                            } else {
                                let p2: Vec<f64> = (0..=40).map(|k| level + k as f64 * 0.5).collect();
                                simpson_pieces(&|x| (-hf(x)).exp(), &p2, 1e-12 * (-hf(level)).exp()) / z_h
                            }
                        } else if level >= 0.0 {
                            0.0
                        } else {
                            // {|x| ≤ √(−2 level/β)}
                            let rr = (-2.0 * level / beta).sqrt();
                            simpson(&|x| (-hf(x)).exp(), -rr, rr, 1e-12 * (-hf(rr)).exp()) / z_h
                        };
                        let got = curve.tail[i];
                        if want > 1e-280 || got > 1e-280 {
                            let e = (got - want).abs() / want.max(1e-300);
                            oracle = oracle.max(e);
                        }
                    }
                }
            }
        }
    }
    pass &= tail_v == 0 && sup_v == 0 && shape_v == 0 && oracle < 1e-7;
    r.line(
        8,
        "continuous-deviation",
        pass,
        start,
        format!(
            "{tail_v} tail violations, {sup_v} pointwise-bound violations, {shape_v} shape violations over 600 functions; max tail/bound {max_ratio:.4}; extremal-member oracle rel err {oracle:.1e}"
        ),
    );
}

fn c9(r: &mut Report) {
    let start = Instant::now();
    let (theta, beta) = (1.0, 1.0);
    let rep = poisson_counterexample(theta, beta, (0.5, 30.0), 1e-3).unwrap();
    let lf = ln_fact_table(400);
    let mut a_err = 0.0f64;
    let mut prod_err = 0.0f64;
    for h in &rep.hits {
        let m = h.u_a as f64;
        let a_m = m + (digamma_oracle(m + 1.0) - theta.ln()) / beta;
        a_err = a_err.max((h.a - a_m).abs());
        // direct: Z(a), T(a) and π_θ(f_a ≥ T(a))
        let a = h.a;
        let w = |n: usize| -0.5 * beta * (n as f64 - a).powi(2);
        let mut zs = Kahan::default();
        for n in 0..400 {
            zs.add(w(n).exp() * pois(theta, n, &lf));
        }
        let z = -zs.value().ln();
        let ln_t = w(h.u_a as usize) + z;
        let mut tail = Kahan::default();
        for n in 0..400 {
            if w(n) + z >= ln_t - 1e-12 {
                tail.add(pois(theta, n, &lf));
            }
        }
        prod_err = prod_err.max((ln_t + tail.value().ln() - h.ln_product).abs());
    }
    let mut c_sum = Kahan::default();
    for n in 0..100 {
        c_sum.add((-0.5 * beta * (n * n) as f64).exp());
    }
    let c_beta = -(2.0 * c_sum.value()).ln();
    let poisson_ok = rep.hits.len() >= 10 && rep.min_excess >= 0.0 && rep.t_increasing && a_err < 1e-9 && prod_err < 1e-9
        && (rep.c_beta - c_beta).abs() < 1e-14;

    let a_grid = grid(10.0, 50.0, 41, false);
    let mut floors = Vec::new();
    let mut gamma_ok = true;
    let mut g_err = 0.0f64;
    for &alpha in &[1.0, 1.5] {
        let g = gamma_counterexample(alpha, beta, &a_grid).unwrap();
        for row in &g.rows {
            let a = row.a;
            let dens = |y: f64| if alpha == 1.0 { (-y).exp() } else { y.sqrt() * (-y).exp() / (PI.sqrt() / 2.0) };
            let pts: Vec<f64> = (-40..=40).map(|k| (a + k as f64 * 0.5).max(0.0)).collect();
            let mass = if alpha == 1.0 {
                // ∫₀^∞ e^{−β(y−a)²/2 − y} dy = e^{−a + 1/(2β)} √(2π/β) P(Z > −(a − 1/β)√β)
                let m = a - 1.0 / beta;
                (-a + 0.5 / beta).exp() * (2.0 * PI / beta).sqrt() * (1.0 - normal_upper(m * beta.sqrt()))
            } else {
                let g = |y: f64| (-0.5 * beta * (y - a).powi(2)).exp() * dens(y);
                simpson_pieces(&g, &pts, 1e-15 * g(a))
            };
            let window = simpson(&dens, a - 1.0, a + 1.0, 1e-15 * dens(a));
            let want = window * (-mass.ln() - 0.5 * beta).exp();
            g_err = g_err.max((row.product - want).abs() / want);
        }
        gamma_ok &= g.floor > 0.0;
        floors.push(format!("α={alpha}: floor {:.4}", g.floor));
    }
    gamma_ok &= g_err < 1e-8;
    r.line(
        9,
        "counterexamples",
        poisson_ok && gamma_ok,
        start,
        format!(
            "Poisson: {} hits, min excess over c_β = {:.4}, T increasing {}, a_m err {a_err:.1e}, product err {prod_err:.1e}; Gamma: {} (oracle rel err {g_err:.1e})",
            rep.hits.len(),
            rep.min_excess,
            rep.t_increasing,
            floors.join(", ")
        ),
    );
}

fn c10(r: &mut Report) {
    let start = Instant::now();
    let mut eig = 0.0f64;
    let mut poly = 0.0f64;
    for &alpha in &[0.5, 1.0, 1.5, 3.0] {
        for k in 0..=3usize {
            for &t in &[0.1, 0.5, 2.0] {
                let params = LaguerreKernelParams::new(alpha, t).unwrap();
                for &x in &[0.3, 1.0, 4.0, 9.0] {
                    let q = laguerre_rec(alpha - 1.0, k, x);
                    poly = poly.max((laguerre_poly(alpha, k, x).unwrap() - q).abs());
                    let applied =
                        laguerre_apply(&params, &|y| laguerre_rec(alpha - 1.0, k, y), x, 1e-10).unwrap();
                    eig = eig.max((applied - (-(k as f64) * t).exp() * q).abs());
                }
            }
        }
    }
    let pts = grid(0.1, 10.0, 12, true);
    let mut fd_err = 0.0f64;
    for &t in &[0.1, 0.25] {
        let params = LaguerreKernelParams::new(1.5, t).unwrap();
        for &x in &pts {
            for &y in &pts {
                let h = 1e-3 * x;
                let g = |d: f64| ln_laguerre_kernel(&params, x + d * h, y).unwrap();
                let fd = (-g(2.0) + 16.0 * g(1.0) - 30.0 * g(0.0) + 16.0 * g(-1.0) - g(-2.0)) / (12.0 * h * h);
                let closed = log_hess_32(t, x, y).unwrap();
                fd_err = fd_err.max((closed - fd).abs() / closed.abs());
            }
        }
    }
    let xs = grid(0.1, 10.0, 25, true);
    let ys = grid(1.0, 1e4, 41, true);
    let rep = log_hess_unboundedness(1.0, &xs, &ys).unwrap();
    let c = 2.0 * 0.5f64.exp() / 1f64.exp_m1();
    let direct_min = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .map(|(x, y)| {
            let z: f64 = c * (x * y).sqrt();
            (2.0 - (z / z.sinh()).powi(2) - z / z.tanh()) / (4.0 * x * x)
        })
        .fold(f64::INFINITY, f64::min);
    let ts = grid(1.05, 1e8, 40, true);
    let mut cs = Vec::new();
    let mut tal_ok = true;
    for &alpha in &[0.5, 1.0, 1.5, 3.0] {
        let lt = laguerre_talagrand_tail(alpha, 1.0, &ts).unwrap();
        let holds = ts.iter().enumerate().all(|(i, &t)| lt.curve.tail[i] <= lt.fitted_c * log_envelope(t) * (1.0 + 1e-12));
        tal_ok &= holds && lt.fitted_c.is_finite() && lt.fitted_c > 0.0;
        cs.push(format!("{alpha}: {:.4}", lt.fitted_c));
    }
    let pass = eig < 1e-6
        && poly < 1e-10
        && fd_err < 1e-5
        && rep.min_value < -1e3
        && (rep.min_value - direct_min).abs() <= 1e-9 * direct_min.abs()
        && tal_ok;
    r.line(
        10,
        "laguerre",
        pass,
        start,
        format!(
            "eigen-decay max err {eig:.1e}; log-Hessian vs FD rel {fd_err:.1e}; grid min {:.1} (direct {direct_min:.1}); fitted c by α [{}]",
            rep.min_value,
            cs.join(", ")
        ),
    );
}

fn c11(r: &mut Report) {
    let start = Instant::now();
    let small: &[(&str, &str)] = &[
        ("mm-loghess", r#"{"functions": 5}"#),
        ("mm-preservation", r#"{"functions": 2}"#),
        ("fk-gradient", r#"{"n_paths": 4000, "steps": 32}"#),
        ("fk-hessian", r#"{"n_paths": 4000, "steps": 32}"#),
        ("fk-hessian-alt", r#"{"n_paths": 4000, "steps": 32}"#),
        ("htransform-bound", r#"{"n_paths": 1000, "steps": 16}"#),
        ("diffusion-talagrand", r#"{"corpus": 3}"#),
        (
            "diffusion-talagrand",
            r#"{"corpus": 2, "h": {"kind": "gaussian_plus_bracket", "p": 1.0}, "n_paths": 256, "steps": 16, "x_points": 21, "spike_at": null}"#,
        ),
        ("deviation-continuous", r#"{"count": 5}"#),
    ];
    let stochastic: Vec<&str> = REGISTRY.iter().filter(|e| e.stochastic).map(|e| e.id).collect();
    let covered = stochastic.iter().all(|id| small.iter().any(|(s, _)| s == id));
    let mut identical = 0;
    let mut differ = Vec::new();
    for (id, params) in small {
        let mut cfg = ExperimentConfig::new(*id);
        cfg.parameters = serde_json::from_str(params).unwrap();
        cfg.seed = Some(1234);
        let a = harness::run(&cfg).unwrap();
        let b = harness::run(&cfg).unwrap();
        if table_csv(&a.table).unwrap() == table_csv(&b.table).unwrap()
            && a.metadata.config_hash == b.metadata.config_hash
        {
            identical += 1;
        } else {
            differ.push(*id);
        }
    }
    r.line(
        11,
        "determinism",
        covered && differ.is_empty(),
        start,
        format!("{identical}/{} reruns byte-identical; all {} seeded experiments covered: {covered}", small.len(), stochastic.len()),
    );
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    let all: [fn(&mut Report); 11] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    for (i, c) in all.iter().enumerate() {
        if only.is_none_or(|o| o as usize == i + 1) {
            c(&mut r);
        }
    }
    if r.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: FAILED {:?}", r.failed);
        std::process::exit(1);
    }
}
