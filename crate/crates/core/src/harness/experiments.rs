//! The registered experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use super::{parse_params, Ctx, DefaultGrids, Experiment, GridSpec, Outcome, Runner};
use crate::deviation::{
    check_semiconvex_sup_bound, deviation_bound_diffusion, f_lambda, poisson_counterexample,
    poisson_logconvex_deviation, semiconvex_corpus, talagrand_diffusion_experiment, DiffusionTalagrandOptions,
    HMeasure,
};
use crate::diffusion::{
    fd_grad_log_fk, fd_hess_log_fk, grad_log_fk, h_transform, hess_log_fk, hess_log_fk_alt, hess_lower_bound,
    lh_hess_log, ou_log_derivative, GaussianBump, OUParams, PathSpec, Potential, Potential1D, PositiveFn,
    QuadraticPotential, ZeroPotential,
};
use crate::discrete::{
    check_preservation, hypercube_kernel, hypercube_sup, mm_talagrand_tail,
    optimality_witness, psi_s_auto, FuncOnN, MMParams, MmKernel, Property,
};
use crate::error::{domain, Result};
use crate::laguerre::{
    gamma_counterexample, laguerre_apply, laguerre_poly, laguerre_talagrand_tail, ln_laguerre_kernel,
    log_hess_32, log_hess_unboundedness, LaguerreKernelParams,
};
use crate::seed::seed_derive;

fn prep<P>(v: &Value, body: fn(&P, &Ctx) -> Result<Outcome>) -> Result<(Value, Runner)>
where
    P: DeserializeOwned + Serialize + 'static,
{
    let (p, resolved) = parse_params::<P>(v)?;
    Ok((resolved, Box::new(move |ctx| body(&p, ctx))))
}

const NO_GRIDS: DefaultGrids = DefaultGrids { t: None, x: None, n: None };

macro_rules! entry {
    ($id:literal, $stmt:literal, stochastic: $st:literal, [$($col:literal),+], $grids:expr, $params:ty, $body:path) => {
        Experiment {
            id: $id,
            statement: $stmt,
            stochastic: $st,
            columns: &[$($col),+],
            default_grids: $grids,
            prepare: |v| prep::<$params>(v, $body),
        }
    };
}

pub static REGISTRY: &[Experiment] = &[
    entry!(
        "mm-loghess",
        "M/M/∞ semigroup: Δ log P_t f(n) ≥ ln((1 − p²/(p + ρ(1−p)²)²)/12) for every f ≥ 0",
        stochastic: true,
        ["n", "t", "delta_log", "bound"],
        DefaultGrids {
            t: Some(GridSpec::log(0.1, 5.0, 5)),
            x: None,
            n: Some(GridSpec::linear(1.0, 200.0, 200)),
        },
        MmLogHess,
        mm_loghess
    ),
    entry!(
        "mm-preservation",
        "M/M/∞ semigroup preserves β-semi-log-convexity, log-concavity and ultra-log-concavity of f·π_ρ",
        stochastic: true,
        ["property", "function", "t", "n", "input", "output"],
        DefaultGrids {
            t: Some(GridSpec::log(0.1, 5.0, 5)),
            x: None,
            n: Some(GridSpec::linear(1.0, 50.0, 50)),
        },
        MmPreservation,
        mm_preservation
    ),
    entry!(
        "mm-psi",
        "√n Ψ_s(n) stays between positive constants; the lower constant 1/9 holds on the lattice n e^s ∈ ℕ",
        stochastic: false,
        ["n", "psi", "sqrt_n_psi", "lattice"],
        DefaultGrids { t: None, x: None, n: Some(GridSpec::linear(1.0, 2000.0, 2000)) },
        MmPsi,
        mm_psi
    ),
    entry!(
        "mm-talagrand",
        "π_1(n!Ψ_s(n) ≥ t) ≤ c √(ln ln t)/(t √ln t) for the M/M/∞ queue",
        stochastic: false,
        ["t", "tail", "bound", "proof_bound", "threshold"],
        DefaultGrids { t: Some(GridSpec::log(4.0, 1e12, 41)), x: None, n: None },
        MmTalagrand,
        mm_talagrand
    ),
    entry!(
        "mm-counterexample",
        "β-semi-log-concave f_a under π_θ: T(a) π_θ(f_a ≥ T(a)) ≥ e^{c_β} along T(a) → ∞",
        stochastic: false,
        ["a", "u_a", "ln_t", "tail", "ln_product", "excess"],
        NO_GRIDS,
        MmCounterexample,
        mm_counterexample
    ),
    entry!(
        "hypercube-sup",
        "Hypercube heat kernel: sup_η K_s(σ, η) = (1 + e^{−s})ⁿ grows with the dimension",
        stochastic: false,
        ["n_dim", "s", "closed_form", "brute_force"],
        DefaultGrids { t: None, x: None, n: Some(GridSpec::linear(1.0, 12.0, 12)) },
        Hypercube,
        hypercube
    ),
    entry!(
        "ou-derivatives",
        "Ornstein–Uhlenbeck semigroup: (ln P_t g)'' ≥ −c_t² for every g ≥ 0",
        stochastic: false,
        ["t", "x", "u1", "u2", "lower"],
        DefaultGrids {
            t: Some(GridSpec::log(0.05, 5.0, 12)),
            x: Some(GridSpec::linear(-3.0, 3.0, 25)),
            n: None,
        },
        OuDerivatives,
        ou_derivatives
    ),
    entry!(
        "fk-gradient",
        "Feynman–Kac gradient formula ∇ ln P_t^V f = E_w[A] matches finite differences",
        stochastic: true,
        ["x", "t", "estimate", "estimate_se", "reference", "reference_se", "z"],
        NO_GRIDS,
        FkParams,
        fk_gradient
    ),
    entry!(
        "fk-hessian",
        "Feynman–Kac Hessian formula Hess ln P_t^V f = −d_t e^{−at} − E_w[∫α²HessV] + Cov_w(A) matches finite differences",
        stochastic: true,
        ["x", "t", "estimate", "estimate_se", "reference", "reference_se", "z"],
        NO_GRIDS,
        FkParams,
        fk_hessian
    ),
    entry!(
        "fk-hessian-alt",
        "Second Feynman–Kac Hessian representation through ∇ ln f and e^{−as} ∇V agrees with the first",
        stochastic: true,
        ["x", "t", "estimate", "estimate_se", "reference", "reference_se", "z"],
        NO_GRIDS,
        FkParams,
        fk_hessian_alt
    ),
    entry!(
        "htransform-bound",
        "Diffusion with invariant law e^{−h}: Hess ln P_t^h f ≥ −c_t² − ½(1 − h'') − ½ sup V''",
        stochastic: true,
        ["t", "x", "hess", "se", "lower_bound", "margin"],
        DefaultGrids {
            t: Some(GridSpec::log(0.2, 3.0, 4)),
            x: Some(GridSpec::linear(-1.5, 1.5, 4)),
            n: None,
        },
        HtransformParams,
        htransform_bound
    ),
    entry!(
        "diffusion-talagrand",
        "Regularized tails μ_h(P_s g ≥ t ∫g dμ_h) ≤ ((C + β)/c)/(t √ln t)",
        stochastic: true,
        ["label", "t", "tail", "bound"],
        DefaultGrids { t: Some(GridSpec::log(2.0, 1e4, 20)), x: None, n: None },
        DiffusionTalagrandParams,
        diffusion_talagrand
    ),
    entry!(
        "deviation-continuous",
        "β-semi-log-convex f under μ_h with c ≤ h'' ≤ C: μ_h(f ≥ t ∫f dμ_h) ≤ ((C + β)/c)/(t √ln t)",
        stochastic: true,
        ["h", "beta", "label", "t", "tail", "bound"],
        DefaultGrids {
            t: Some(GridSpec::log(2.0, 1e6, 25)),
            x: Some(GridSpec::linear(-6.0, 6.0, 61)),
            n: None,
        },
        DeviationContinuous,
        deviation_continuous
    ),
    entry!(
        "deviation-poisson",
        "Log-convex f under π_θ: π_θ(f ≥ t ∫f dπ_θ) ≤ min(1/t, 2/(t √Φ_θ⁻¹(ln t)))",
        stochastic: false,
        ["lambda", "t", "tail", "bound"],
        DefaultGrids { t: Some(GridSpec::log(4.0, 1e12, 41)), x: None, n: None },
        DeviationPoisson,
        deviation_poisson
    ),
    entry!(
        "poisson-optimality",
        "The √(ln ln t) factor is needed: f_λ = e^{λn + 1 − e^λ} at λ = ln k saturates the rate",
        stochastic: false,
        ["k", "t", "tail", "lhs", "rhs"],
        DefaultGrids { t: None, x: None, n: Some(GridSpec::linear(3.0, 50.0, 48)) },
        NoParams,
        poisson_optimality
    ),
    entry!(
        "laguerre-eigen",
        "Laguerre semigroup: P_t Q_k = e^{−kt} Q_k",
        stochastic: false,
        ["alpha", "k", "t", "x", "applied", "expected", "abs_err"],
        DefaultGrids {
            t: Some(GridSpec::log(0.1, 2.0, 4)),
            x: Some(GridSpec::linear(0.5, 8.0, 6)),
            n: None,
        },
        LaguerreEigen,
        laguerre_eigen
    ),
    entry!(
        "laguerre-loghess",
        "Laguerre kernel at α = 3/2: ∂²_x ln G_t = (2 − z²/sinh²z − z coth z)/(4x²), unbounded below",
        stochastic: false,
        ["t", "x", "y", "closed_form", "finite_difference", "rel_err"],
        NO_GRIDS,
        LaguerreLogHess,
        laguerre_loghess
    ),
    entry!(
        "laguerre-counterexample",
        "Gamma law: t · sup_f ν_α(f ≥ t) does not vanish over β-semi-log-concave f",
        stochastic: false,
        ["alpha", "a", "ln_t", "tail", "product", "window_ratio"],
        DefaultGrids { t: None, x: Some(GridSpec::linear(10.0, 50.0, 41)), n: None },
        LaguerreCounterexample,
        laguerre_counterexample
    ),
    entry!(
        "laguerre-talagrand",
        "Laguerre semigroup: ν_α(P_s f ≥ t) ≤ c/(t √ln t) for normalized f ≥ 0",
        stochastic: false,
        ["alpha", "t", "tail", "bound"],
        DefaultGrids { t: Some(GridSpec::log(1.5, 1e8, 40)), x: None, n: None },
        LaguerreTalagrandParams,
        laguerre_talagrand
    ),
];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

fn rng_for(seed: u64, labels: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_derive(seed, labels))
}

/// Random `f ≥ 0` supported on `0..=support`, with roughly 30% zeros and
/// magnitudes spread over ten orders.
fn random_nonnegative(rng: &mut ChaCha8Rng, support: u64) -> FuncOnN {
    let mut vals: Vec<f64> = (0..=support)
        .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-11.5..11.5f64).exp() })
        .collect();
    if vals.iter().all(|&v| v == 0.0) {
        vals[0] = 1.0;
    }
    FuncOnN::with_support(move |k| vals.get(k as usize).copied().unwrap_or(0.0), support)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MmLogHess {
    rho: f64,
    functions: usize,
    support: u64,
}

impl Default for MmLogHess {
    fn default() -> Self {
        MmLogHess { rho: 1.0, functions: 20, support: 60 }
    }
}

fn mm_loghess(p: &MmLogHess, ctx: &Ctx) -> Result<Outcome> {
    let ns = ctx.n();
    let n_max = *ns.iter().max().unwrap_or(&1);
    if ns.first() == Some(&0) {
        return Err(domain("n_grid must start at 1"));
    }
    let mut rng = rng_for(ctx.seed, &["mm-loghess"]);
    let corpus: Vec<FuncOnN> = (0..p.functions).map(|_| random_nonnegative(&mut rng, p.support)).collect();
    let mut out = Outcome::new();
    for t in ctx.t() {
        let params = MMParams::with_rho(p.rho, t)?;
        let kernel = MmKernel::new(params, n_max + 1, n_max + 1 + 64.max(p.support));
        let mut min = vec![f64::INFINITY; n_max as usize + 1];
        let mut bound = f64::NAN;
        let mut bad = vec![false; n_max as usize + 1];
        for f in &corpus {
            let rep = kernel.semilogconvexity(f)?;
            bound = rep.bound;
            for &(n, v) in &rep.rows {
                min[n as usize] = min[n as usize].min(v);
            }
            for &n in &rep.violations {
                bad[n as usize] = true;
            }
        }
        for &n in &ns {
            out.row(vec![n.into(), t.into(), min[n as usize].into(), bound.into()], Some(!bad[n as usize]));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MmPreservation {
    rho: f64,
    beta: f64,
    functions: usize,
}

impl Default for MmPreservation {
    fn default() -> Self {
        MmPreservation { rho: 1.0, beta: 0.5, functions: 5 }
    }
}

/// `ln f(k) = λk − βk²/2 ± Σ wⱼ softplus(k − mⱼ)`: β-semi-log-convex with
/// the plus sign, log-concave with the minus sign.
fn softplus_family(rng: &mut ChaCha8Rng, beta: f64, convex: bool) -> FuncOnN {
    let lam = rng.random_range(-1.0..1.0f64);
    let terms: Vec<(f64, f64)> = (0..3).map(|_| (rng.random_range(0.0..1.0f64), rng.random_range(0.0..30.0f64))).collect();
    let wsum: f64 = terms.iter().map(|t| t.0).sum();
    let sign = if convex { 1.0 } else { -1.0 };
    let ln_f = move |k: u64| {
        let x = k as f64;
        let sp: f64 = terms.iter().map(|&(w, m)| w * (x - m).exp().ln_1p()).sum();
        lam * x - 0.5 * beta * x * x + sign * sp
    };
    if convex {
        FuncOnN::from_log(ln_f, (wsum * std::f64::consts::LN_2).exp(), lam.max(0.0) + wsum)
    } else {
        FuncOnN::from_log(ln_f, 1.0, lam.max(0.0))
    }
}

fn mm_preservation(p: &MmPreservation, ctx: &Ctx) -> Result<Outcome> {
    let ns = ctx.n();
    let n_max = *ns.iter().max().unwrap_or(&1);
    let mut rng = rng_for(ctx.seed, &["mm-preservation"]);
    let cases: Vec<(&str, Property, Vec<FuncOnN>)> = vec![
        (
            "semi-log-convex",
            Property::SemiLogConvex { beta: p.beta },
            (0..p.functions).map(|_| softplus_family(&mut rng, p.beta, true)).collect(),
        ),
        (
            "log-concave",
            Property::LogConcave,
            (0..p.functions).map(|_| softplus_family(&mut rng, p.beta, false)).collect(),
        ),
        (
            "ultra-log-concave",
            Property::UltraLogConcaveLaw,
            (0..p.functions).map(|_| softplus_family(&mut rng, p.beta, false)).collect(),
        ),
    ];
    let mut out = Outcome::new();
    for (name, prop, funcs) in &cases {
        for t in ctx.t() {
            let params = MMParams::with_rho(p.rho, t)?;
            for (fi, f) in funcs.iter().enumerate() {
                let rep = check_preservation(&params, f, *prop, n_max)?;
                for &(n, vin, vout) in &rep.rows {
                    if ns.binary_search(&n).is_ok() {
                        out.row(
                            vec![(*name).into(), fi.into(), t.into(), n.into(), vin.into(), vout.into()],
                            Some(!rep.violations.contains(&n)),
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MmPsi {
    s: f64,
    lower: f64,
}

impl Default for MmPsi {
    fn default() -> Self {
        MmPsi { s: std::f64::consts::LN_2, lower: 1.0 / 9.0 }
    }
}

fn mm_psi(p: &MmPsi, ctx: &Ctx) -> Result<Outcome> {
    use rayon::prelude::*;
    let ns = ctx.n();
    let es = p.s.exp();
    let vals: Vec<f64> = ns.par_iter().map(|&n| psi_s_auto(p.s, n).map(|v| v.psi)).collect::<Result<_>>()?;
    let mut out = Outcome::new();
    let mut c_meas = 0.0f64;
    for (&n, &psi) in ns.iter().zip(&vals) {
        let scaled = (n as f64).sqrt() * psi;
        c_meas = c_meas.max(scaled);
        let ne = n as f64 * es;
        let lattice = (ne - ne.round()).abs() < 1e-9 * ne.max(1.0);
        let ok = lattice.then_some(scaled >= p.lower - 1e-9);
        out.row(vec![n.into(), psi.into(), scaled.into(), lattice.into()], ok);
    }
    out.fit("c_meas", c_meas);
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MmTalagrand {
    s: f64,
    /// `C = max √n Ψ_s(n)` is measured over `n ≤ c_prep_n_max`.
    c_prep_n_max: u64,
}

impl Default for MmTalagrand {
    fn default() -> Self {
        MmTalagrand { s: 1.0, c_prep_n_max: 2000 }
    }
}

fn mm_talagrand(p: &MmTalagrand, ctx: &Ctx) -> Result<Outcome> {
    use rayon::prelude::*;
    let c_prep = (1..=p.c_prep_n_max)
        .into_par_iter()
        .map(|n| psi_s_auto(p.s, n).map(|v| (n as f64).sqrt() * v.psi))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let tt = mm_talagrand_tail(p.s, &ctx.t(), c_prep)?;
    let mut out = Outcome::new();
    for i in 0..tt.curve.len() {
        let (t, tail) = (tt.curve.t[i], tt.curve.tail[i]);
        let ok = tt.proof_bound[i].map(|b| tail <= b * (1.0 + 1e-12));
        out.row(
            vec![t.into(), tail.into(), tt.curve.bound[i].into(), tt.proof_bound[i].into(), tt.threshold[i].into()],
            ok,
        );
    }
    out.fit("fitted_c", tt.fitted_c);
    out.fit("c_prep", c_prep);
    out.curves.push(("tail".into(), tt.curve));
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MmCounterexample {
    theta: f64,
    beta: f64,
    a_lo: f64,
    a_hi: f64,
    step: f64,
    min_hits: usize,
}

impl Default for MmCounterexample {
    fn default() -> Self {
        MmCounterexample { theta: 1.0, beta: 1.0, a_lo: 0.5, a_hi: 30.0, step: 1e-3, min_hits: 10 }
    }
}

fn mm_counterexample(p: &MmCounterexample, _ctx: &Ctx) -> Result<Outcome> {
    let rep = poisson_counterexample(p.theta, p.beta, (p.a_lo, p.a_hi), p.step)?;
    let mut out = Outcome::new();
    for h in &rep.hits {
        let excess = h.ln_product - rep.c_beta;
        out.row(
            vec![h.a.into(), h.u_a.into(), h.ln_t.into(), h.tail.into(), h.ln_product.into(), excess.into()],
            Some(excess >= 0.0),
        );
    }
    out.fit("c_beta", rep.c_beta);
    out.fit("min_excess", rep.min_excess);
    if rep.hits.len() < p.min_hits {
        out.fail(format!("only {} integer crossings of u_a", rep.hits.len()));
    }
    if !rep.t_increasing {
        out.fail("T(a) is not increasing over the last hits");
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Hypercube {
    s: f64,
}

impl Default for Hypercube {
    fn default() -> Self {
        Hypercube { s: 0.5 }
    }
}

fn hypercube(p: &Hypercube, ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::new();
    for n in ctx.n() {
        if n == 0 || n > 20 {
            return Err(domain("hypercube dimensions must lie in 1..=20"));
        }
        let sigma = vec![1i8; n as usize];
        let mut best = 0.0f64;
        for mask in 0u32..(1 << n) {
            let eta: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            best = best.max(hypercube_kernel(p.s, &sigma, &eta)?);
        }
        let closed = hypercube_sup(p.s, n as u32)?;
        out.row(vec![n.into(), p.s.into(), closed.into(), best.into()], Some((closed - best).abs() <= 1e-12 * closed));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OuDerivatives {
    a: f64,
    sigma: f64,
    /// `g(y) = Σ wᵢ exp(−(y − mᵢ)²/(2 width²))`.
    centers: Vec<f64>,
    weights: Vec<f64>,
    width: f64,
    quad_order: usize,
}

impl Default for OuDerivatives {
    fn default() -> Self {
        OuDerivatives {
            a: 1.0,
            sigma: std::f64::consts::SQRT_2,
            centers: vec![-1.5, 1.5],
            weights: vec![1.0, 1.0],
            width: 0.5,
            quad_order: 80,
        }
    }
}

fn ou_derivatives(p: &OuDerivatives, ctx: &Ctx) -> Result<Outcome> {
    if p.centers.len() != p.weights.len() || p.centers.is_empty() || !(p.width > 0.0) {
        return Err(domain("centers and weights must be non-empty and of equal length"));
    }
    let params = OUParams::new(p.a, p.sigma, 1)?;
    let g = |y: f64| -> f64 {
        p.centers.iter().zip(&p.weights).map(|(m, w)| w * (-(y - m).powi(2) / (2.0 * p.width * p.width)).exp()).sum()
    };
    let mut out = Outcome::new();
    for t in ctx.t() {
        for x in ctx.x() {
            let d = ou_log_derivative(&params, &g, t, x, p.quad_order)?;
            let lower = -d.c_t * d.c_t;
            out.row(
                vec![t.into(), x.into(), d.u1.into(), d.u2.into(), lower.into()],
                Some(d.u2 >= lower - 1e-9 * (1.0 + lower.abs())),
            );
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PotentialSpec {
    Zero,
    /// `½ k x² + c`.
    Quadratic { k: f64, c: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FkParams {
    a: f64,
    sigma: f64,
    potential: PotentialSpec,
    bump_center: f64,
    bump_width: f64,
    /// Evaluation points `(x, t)`.
    points: Vec<(f64, f64)>,
    n_paths: usize,
    steps: usize,
    z_max: f64,
}

impl Default for FkParams {
    fn default() -> Self {
        FkParams {
            a: 1.0,
            sigma: std::f64::consts::SQRT_2,
            potential: PotentialSpec::Quadratic { k: 0.5, c: -0.5 },
            bump_center: 0.3,
            bump_width: 0.8,
            points: vec![(-0.5, 0.3), (0.0, 0.5), (0.4, 1.0), (1.0, 1.5), (-1.2, 2.0)],
            n_paths: 100_000,
            steps: 256,
            z_max: 4.0,
        }
    }
}

struct FkSetup {
    params: OUParams,
    potential: Box<dyn Potential>,
    f: GaussianBump,
}

impl FkParams {
    fn setup(&self) -> Result<FkSetup> {
        if self.points.is_empty() || self.n_paths < 2 || self.steps == 0 {
            return Err(domain("need at least one point, two paths and one step"));
        }
        let potential: Box<dyn Potential> = match self.potential {
            PotentialSpec::Zero => Box::new(ZeroPotential { dim: 1 }),
            PotentialSpec::Quadratic { k, c } => Box::new(QuadraticPotential { dim: 1, k, c }),
        };
        Ok(FkSetup {
            params: OUParams::new(self.a, self.sigma, 1)?,
            potential,
            f: GaussianBump::new(vec![self.bump_center], self.bump_width),
        })
    }

    fn spec(&self, seed: u64, id: &str, role: &str, i: usize) -> PathSpec {
        PathSpec::new(self.n_paths, seed_derive(seed, &[id, role, &i.to_string()])).with_steps(self.steps)
    }
}

fn z_score(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    let s = (sa * sa + sb * sb).sqrt();
    if s > 0.0 {
        (a - b) / s
    } else if a == b {
        0.0
    } else {
        f64::INFINITY
    }
}

fn fk_row(out: &mut Outcome, x: f64, t: f64, est: (f64, f64), reference: (f64, f64), z_max: f64) {
    let z = z_score(est.0, est.1, reference.0, reference.1);
    out.row(
        vec![x.into(), t.into(), est.0.into(), est.1.into(), reference.0.into(), reference.1.into(), z.into()],
        Some(z.abs() <= z_max),
    );
}

fn fk_gradient(p: &FkParams, ctx: &Ctx) -> Result<Outcome> {
    let s = p.setup()?;
    let mut out = Outcome::new();
    for (i, &(x, t)) in p.points.iter().enumerate() {
        let est = grad_log_fk(&s.params, s.potential.as_ref(), &s.f, t, &[x], &p.spec(ctx.seed, "fk-gradient", "mc", i))?;
        let fd = fd_grad_log_fk(&s.params, s.potential.as_ref(), &s.f, t, &[x], &p.spec(ctx.seed, "fk-gradient", "fd", i))?;
        fk_row(&mut out, x, t, (est.value[0], est.se[0]), (fd.value[0], fd.se[0]), p.z_max);
    }
    Ok(out)
}

fn fk_hessian(p: &FkParams, ctx: &Ctx) -> Result<Outcome> {
    let s = p.setup()?;
    let mut out = Outcome::new();
    for (i, &(x, t)) in p.points.iter().enumerate() {
        let est = hess_log_fk(&s.params, s.potential.as_ref(), &s.f, t, &[x], &p.spec(ctx.seed, "fk-hessian", "mc", i))?;
        let reference = match p.potential {
            PotentialSpec::Zero => {
                let g = |y: f64| s.f.ln_value(&[y]).exp();
                (ou_log_derivative(&s.params, &g, t, x, 120)?.u2, 0.0)
            }
            PotentialSpec::Quadratic { .. } => {
                let fd = fd_hess_log_fk(&s.params, s.potential.as_ref(), &s.f, t, &[x], &p.spec(ctx.seed, "fk-hessian", "fd", i))?;
                fd.at(0, 0)
            }
        };
        fk_row(&mut out, x, t, est.at(0, 0), reference, p.z_max);
    }
    Ok(out)
}

fn fk_hessian_alt(p: &FkParams, ctx: &Ctx) -> Result<Outcome> {
    let s = p.setup()?;
    let mut out = Outcome::new();
    for (i, &(x, t)) in p.points.iter().enumerate() {
        let alt = hess_log_fk_alt(&s.params, s.potential.as_ref(), &s.f, t, &[x], &p.spec(ctx.seed, "fk-hessian-alt", "alt", i))?;
        let main = hess_log_fk(&s.params, s.potential.as_ref(), &s.f, t, &[x], &p.spec(ctx.seed, "fk-hessian-alt", "main", i))?;
        fk_row(&mut out, x, t, alt.at(0, 0), main.at(0, 0), p.z_max);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HtransformParams {
    h: Potential1D,
    bump_center: f64,
    bump_width: f64,
    n_paths: usize,
    steps: usize,
    z: f64,
}

impl Default for HtransformParams {
    fn default() -> Self {
        HtransformParams {
            h: Potential1D::GaussianPlusBracket { p: 1.0 },
            bump_center: 0.5,
            bump_width: 1.0,
            n_paths: 50_000,
            steps: 128,
            z: 3.0,
        }
    }
}

fn htransform_bound(p: &HtransformParams, ctx: &Ctx) -> Result<Outcome> {
    let tr = h_transform(p.h)?;
    let f = GaussianBump::new(vec![p.bump_center], p.bump_width);
    let mut out = Outcome::new();
    let mut i = 0usize;
    for t in ctx.t() {
        for x in ctx.x() {
            let spec =
                PathSpec::new(p.n_paths, seed_derive(ctx.seed, &["htransform-bound", &i.to_string()])).with_steps(p.steps);
            i += 1;
            let (hess, se) = lh_hess_log(&tr, &f, t, x, &spec)?.at(0, 0);
            let lb = hess_lower_bound(&tr, t, x)?;
            let margin = hess + p.z * se - lb;
            out.row(
                vec![t.into(), x.into(), hess.into(), se.into(), lb.into(), margin.into()],
                Some(margin >= 0.0),
            );
        }
    }
    out.fit("sup_v_second", tr.sup_v_second);
    out.fit("v_min", tr.v_min);
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DiffusionTalagrandParams {
    h: Potential1D,
    s: f64,
    beta: f64,
    corpus: usize,
    radius: f64,
    x_points: usize,
    n_paths: usize,
    steps: usize,
    spike_at: Option<f64>,
}

impl Default for DiffusionTalagrandParams {
    fn default() -> Self {
        let o = DiffusionTalagrandOptions::default();
        DiffusionTalagrandParams {
            h: Potential1D::Gaussian,
            s: 1.0,
            beta: 1.0,
            corpus: 5,
            radius: o.radius,
            x_points: o.x_points,
            n_paths: o.paths.n_paths,
            steps: o.paths.steps,
            spike_at: o.spike_at,
        }
    }
}

fn diffusion_talagrand(p: &DiffusionTalagrandParams, ctx: &Ctx) -> Result<Outcome> {
    let corpus = semiconvex_corpus(ctx.seed, p.beta, p.corpus);
    let opts = DiffusionTalagrandOptions {
        radius: p.radius,
        x_points: p.x_points,
        paths: PathSpec::new(p.n_paths, seed_derive(ctx.seed, &["diffusion-talagrand"])).with_steps(p.steps),
        spike_at: p.spike_at,
    };
    let rep = talagrand_diffusion_experiment(p.h, p.s, &ctx.t(), &corpus, &opts)?;
    let mut out = Outcome::new();
    for sc in &rep.curves {
        let bad = sc.curve.violations(1e-9);
        for i in 0..sc.curve.len() {
            let ok = (!rep.exploratory).then(|| !bad.contains(&i));
            out.row(
                vec![sc.label.clone().into(), sc.curve.t[i].into(), sc.curve.tail[i].into(), sc.curve.bound[i].into()],
                ok,
            );
        }
        out.curves.push((sc.label.clone(), sc.curve.clone()));
    }
    out.fit("beta", rep.beta);
    out.fit("d_const", rep.d_const);
    out.fit("fitted_d", rep.fitted_d);
    if rep.exploratory {
        out.exploratory = true;
        out.notes.push("V is unbounded below; bound column uses the fitted constant".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DeviationContinuous {
    hs: Vec<Potential1D>,
    betas: Vec<f64>,
    count: usize,
}

impl Default for DeviationContinuous {
    fn default() -> Self {
        DeviationContinuous {
            hs: vec![Potential1D::Gaussian, Potential1D::GaussianPlusBracket { p: 1.0 }],
            betas: vec![0.0, 1.0, 5.0],
            count: 100,
        }
    }
}

fn h_label(h: &Potential1D) -> String {
    match h {
        Potential1D::Gaussian => "gaussian".into(),
        Potential1D::GaussianPlusBracket { p } => format!("bracket-{p}"),
        Potential1D::GaussianCos { eps } => format!("cos-{eps}"),
    }
}

fn deviation_continuous(p: &DeviationContinuous, ctx: &Ctx) -> Result<Outcome> {
    use rayon::prelude::*;
    let (ts, xs) = (ctx.t(), ctx.x());
    let mut out = Outcome::new();
    let mut sup_bound_violations = 0usize;
    for h in &p.hs {
        let mu = HMeasure::new(*h)?;
        let hl = h_label(h);
        for &beta in &p.betas {
            let corpus = semiconvex_corpus(ctx.seed, beta, p.count);
            let results: Vec<_> = corpus
                .par_iter()
                .map(|f| Ok((deviation_bound_diffusion(&mu, f, &ts)?, check_semiconvex_sup_bound(&mu, f, &xs)?.violations)))
                .collect::<Result<_>>()?;
            let mut max_ratio = 0.0f64;
            for (f, (curve, lv)) in corpus.iter().zip(&results) {
                sup_bound_violations += lv;
                let bad = curve.violations(1e-9);
                max_ratio = max_ratio.max(curve.max_ratio());
                for i in 0..curve.len() {
                    out.row(
                        vec![
                            hl.clone().into(),
                            beta.into(),
                            f.label.clone().into(),
                            curve.t[i].into(),
                            curve.tail[i].into(),
                            curve.bound[i].into(),
                        ],
                        Some(!bad.contains(&i)),
                    );
                }
            }
            out.fit(format!("max_ratio[{hl},beta={beta}]"), max_ratio);
            out.curves.push((format!("{hl}-beta{beta}-{}", corpus[0].label), results[0].0.clone()));
        }
    }
    out.fit("sup_bound_violations", sup_bound_violations as f64);
    if sup_bound_violations > 0 {
        out.fail(format!("{sup_bound_violations} violations of the pointwise bound φ − ln∫e^φ dμ ≤ ½ln((C+β)/2π) + h"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DeviationPoisson {
    theta: f64,
    lambdas: Vec<f64>,
}

impl Default for DeviationPoisson {
    fn default() -> Self {
        DeviationPoisson { theta: 1.0, lambdas: vec![0.5, 1.0, 2.0, 3.0] }
    }
}

fn deviation_poisson(p: &DeviationPoisson, ctx: &Ctx) -> Result<Outcome> {
    let ts = ctx.t();
    let mut out = Outcome::new();
    for &lam in &p.lambdas {
        let dev = poisson_logconvex_deviation(p.theta, &f_lambda(lam), &ts)?;
        let bad = dev.curve.violations(1e-12);
        for i in 0..dev.curve.len() {
            out.row(
                vec![lam.into(), dev.curve.t[i].into(), dev.curve.tail[i].into(), dev.curve.bound[i].into()],
                Some(!bad.contains(&i)),
            );
        }
        out.fit(format!("fitted_c[lambda={lam}]"), dev.fitted_c);
        out.curves.push((format!("lambda{lam}"), dev.curve));
    }
    Ok(out)
}

fn poisson_optimality(_p: &NoParams, ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::new();
    for k in ctx.n() {
        let w = optimality_witness(k)?;
        out.row(
            vec![k.into(), w.t.into(), w.tail.into(), w.lhs.into(), w.rhs.into()],
            Some(w.lhs >= w.rhs - 1e-9),
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LaguerreEigen {
    alphas: Vec<f64>,
    max_k: usize,
    tol: f64,
}

impl Default for LaguerreEigen {
    fn default() -> Self {
        LaguerreEigen { alphas: vec![0.5, 1.0, 1.5, 3.0], max_k: 3, tol: 1e-6 }
    }
}

fn laguerre_eigen(p: &LaguerreEigen, ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::new();
    for &alpha in &p.alphas {
        for k in 0..=p.max_k {
            for t in ctx.t() {
                let params = LaguerreKernelParams::new(alpha, t)?;
                let q = |y: f64| laguerre_poly(alpha, k, y).unwrap_or(f64::NAN);
                for x in ctx.x() {
                    let applied = laguerre_apply(&params, &q, x, 1e-10)?;
                    let expected = (-(k as f64) * t).exp() * laguerre_poly(alpha, k, x)?;
                    let err = (applied - expected).abs();
                    out.row(
                        vec![alpha.into(), k.into(), t.into(), x.into(), applied.into(), expected.into(), err.into()],
                        Some(err < p.tol),
                    );
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LaguerreLogHess {
    /// Times for the finite-difference comparison on `[0.1, 10]²`.
    fd_times: Vec<f64>,
    fd_points: usize,
    rel_tol: f64,
    /// Time and `(x, y)` ranges for the unboundedness scan.
    scan_t: f64,
    scan_x: (f64, f64),
    scan_y: (f64, f64),
    scan_points: usize,
    /// The scan minimum must fall below this value.
    below: f64,
}

impl Default for LaguerreLogHess {
    fn default() -> Self {
        LaguerreLogHess {
            fd_times: vec![0.1, 0.25],
            fd_points: 12,
            rel_tol: 1e-5,
            scan_t: 1.0,
            scan_x: (0.1, 10.0),
            scan_y: (1.0, 1e4),
            scan_points: 41,
            below: -1e3,
        }
    }
}

/// Five-point central second difference of `ln G_t(·, y)` at `x`.
fn fd_log_hess(params: &LaguerreKernelParams, x: f64, y: f64) -> Result<f64> {
    let h = 1e-3 * x;
    let g = |d: f64| ln_laguerre_kernel(params, x + d * h, y);
    Ok((-g(2.0)? + 16.0 * g(1.0)? - 30.0 * g(0.0)? + 16.0 * g(-1.0)? - g(-2.0)?) / (12.0 * h * h))
}

fn laguerre_loghess(p: &LaguerreLogHess, _ctx: &Ctx) -> Result<Outcome> {
    let pts = crate::tail::grid(0.1, 10.0, p.fd_points.max(2), true);
    let mut out = Outcome::new();
    for &t in &p.fd_times {
        let params = LaguerreKernelParams::new(1.5, t)?;
        for &x in &pts {
            for &y in &pts {
                let closed = log_hess_32(t, x, y)?;
                let fd = fd_log_hess(&params, x, y)?;
                let rel = (closed - fd).abs() / closed.abs().max(1e-300);
                out.row(
                    vec![t.into(), x.into(), y.into(), closed.into(), fd.into(), rel.into()],
                    Some(rel <= p.rel_tol),
                );
            }
        }
    }
    let xs = crate::tail::grid(p.scan_x.0, p.scan_x.1, p.scan_points, true);
    let ys = crate::tail::grid(p.scan_y.0, p.scan_y.1, p.scan_points, true);
    let rep = log_hess_unboundedness(p.scan_t, &xs, &ys)?;
    out.fit("scan_min", rep.min_value);
    out.fit("scan_max", rep.max_value);
    if !(rep.min_value < p.below) {
        out.fail(format!("scan minimum {} is not below {}", rep.min_value, p.below));
    }
    if !rep.monotone {
        out.fail("log-Hessian does not decrease monotonically in y");
    }
    if rep.max_value > 1e-12 {
        out.fail(format!("log-Hessian takes the positive value {}", rep.max_value));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LaguerreCounterexample {
    alphas: Vec<f64>,
    beta: f64,
}

impl Default for LaguerreCounterexample {
    fn default() -> Self {
        LaguerreCounterexample { alphas: vec![1.0, 1.5], beta: 1.0 }
    }
}

fn laguerre_counterexample(p: &LaguerreCounterexample, ctx: &Ctx) -> Result<Outcome> {
    let a_grid = ctx.x();
    let mut out = Outcome::new();
    for &alpha in &p.alphas {
        let rep = gamma_counterexample(alpha, p.beta, &a_grid)?;
        for r in &rep.rows {
            out.row(
                vec![alpha.into(), r.a.into(), r.ln_t.into(), r.tail.into(), r.product.into(), r.window_ratio.into()],
                Some(r.product > 0.0 && r.product.is_finite()),
            );
        }
        out.fit(format!("floor[alpha={alpha}]"), rep.floor);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LaguerreTalagrandParams {
    alphas: Vec<f64>,
    s: f64,
}

impl Default for LaguerreTalagrandParams {
    fn default() -> Self {
        LaguerreTalagrandParams { alphas: vec![0.5, 1.0, 1.5, 3.0], s: 1.0 }
    }
}

fn laguerre_talagrand(p: &LaguerreTalagrandParams, ctx: &Ctx) -> Result<Outcome> {
    let ts = ctx.t();
    let mut out = Outcome::new();
    for &alpha in &p.alphas {
        let lt = laguerre_talagrand_tail(alpha, p.s, &ts)?;
        let bad = lt.curve.violations(1e-12);
        for i in 0..lt.curve.len() {
            out.row(
                vec![alpha.into(), lt.curve.t[i].into(), lt.curve.tail[i].into(), lt.curve.bound[i].into()],
                Some(!bad.contains(&i)),
            );
        }
        if !lt.fitted_c.is_finite() {
            out.fail(format!("no finite constant for α = {alpha}"));
        }
        out.fit(format!("fitted_c[alpha={alpha}]"), lt.fitted_c);
        out.curves.push((format!("alpha{alpha}"), lt.curve));
    }
    Ok(out)
}

