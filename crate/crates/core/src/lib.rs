//! Numerical laboratory for semi-log-convexity of Markov semigroups.
//!
//! | module        | contents                                                        |
//! |---------------|-----------------------------------------------------------------|
//! | [`specfun`]   | Hermite, Bessel, log-Gamma, digamma, rate functions, quadrature |
//! | [`discrete`]  | Poisson and binomial laws, the M/M/∞ semigroup, `Ψ_s`, hypercube |
//! | [`diffusion`] | Ornstein–Uhlenbeck semigroup, bridges, Feynman–Kac estimators    |
//! | [`deviation`] | Convex conjugates and deviation inequalities                    |
//! | [`laguerre`]  | Laguerre semigroup on the Gamma law                             |
//! | [`harness`]   | Experiment registry, configuration and CSV/JSON emission        |

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deviation;
pub mod diffusion;
pub mod discrete;
mod error;
pub mod harness;
pub mod laguerre;
pub mod seed;
pub mod specfun;
pub mod tail;

pub use error::{Error, ErrorKind, Result};
