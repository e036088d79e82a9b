//! Revealed-preference auditing of multi-agent play and adaptive mechanism design.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the shared domain types (budget functions, empirical
//!   strategies, datasets, certificates) and probe generation.
//! * [`lp`] is a small dense simplex backend.
//! * [`rp`] implements the consistency tests and the Pareto-gap loss.
//! * [`game`] provides concave games, Nash computation and dataset collection.
//! * [`spsa`] tunes a mechanism parameter by stochastic approximation.
//! * [`dro`] estimates a Wasserstein-robust gap with an exchange method.
//! * [`cli`] wires everything into the `pareto-forge` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod dro;
pub mod error;
pub mod game;
pub mod io;
pub mod lp;
pub mod model;
pub mod optim;
pub mod rng;
pub mod rp;
pub mod spsa;
pub mod synth;

pub use error::{Error, Result};
pub use model::{
    ConstraintFunction, ConstraintKind, EmpiricalStrategy, GbarTable, ParetoCertificate, ProbeSpec, RpDataset,
};

/// Default tolerance for "within budget" checks.
pub const TOL_FEAS: f64 = 1e-6;
/// Default absolute tolerance on LP constraint residuals.
pub const TOL_LP: f64 = 1e-7;
/// Default bisection tolerance for the Pareto gap.
pub const TOL_R: f64 = 1e-5;
/// Default lower bound enforced on every multiplier.
pub const ALPHA: f64 = 1e-3;
