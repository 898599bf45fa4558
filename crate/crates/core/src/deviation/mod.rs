//! Deviation inequalities for semi-log-convex functions and the
//! counterexamples showing where they fail.
//!
//! A positive `f` is β-semi-log-convex when `(ln f)'' ≥ −β` on the line,
//! or `Δ ln f ≥ −β` on `ℕ`.

mod conjugate;
mod continuous;
mod counterexample;
mod poisson;
mod talagrand;

pub use conjugate::{biconjugate, conjugate_at, convex_conjugate, fenchel_young_gap, Conjugate};
pub use continuous::{
    check_semiconvex_sup_bound, deviation_bound_diffusion, semiconvex_corpus, HMeasure, SemiConvexFn, SlcComponent,
    SupBoundReport, SupBoundRow,
};
pub use counterexample::{poisson_counterexample, psi_a, u_a, CounterexampleHit, CounterexampleReport};
pub use poisson::{f_lambda, poisson_logconvex_deviation, PoissonDeviation};
pub use talagrand::{talagrand_diffusion_experiment, DiffusionTalagrand, DiffusionTalagrandOptions, SpikeCurve};
