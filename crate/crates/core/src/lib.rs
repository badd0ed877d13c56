//! Core numerics for sampled-data systems perturbed by small state-dependent
//! white noise.
//!
//! The crate simulates four coupled objects on a shared time grid:
//!
//! - the sampled-data SDE `dX = [f(X) + g(X) κ(X_{π_δ(t)})] dt + ε σ(X) dW`,
//! - the sampled ODE (the same recursion with `ε = 0`),
//! - the limiting ODE `ẋ = f(x) + g(x) κ(x)`,
//! - the limiting fluctuation SDE for `Z ≈ (X − x)/ε`, which carries the
//!   effective drift `−(c/2) gDκ(x) [f(x) + g(x) κ(x)]`.
//!
//! It also carries the Monte Carlo error metrics, deterministic aggregation
//! and rate fitting used to check pathwise convergence. Everything here is
//! `no_std` with `alloc`; IO, threading and the command line live in the
//! `sampled-sde` companion crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod experiment;
pub mod integrators;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod stats;
pub mod time_grid;

pub use error::{Error, Result};
pub use experiment::{
    adjacent_inversions, fit_rate, linear_oracle_moments, run_cell, run_cell_on, spearman_rho,
    sup_error_1norm, sweep_epsilon, sweep_epsilon_on, sweep_pairs, sweep_pairs_on,
    terminal_fluctuation_moments_on, ErrorSummary, Estimate, Executor, LinearOracleMoments,
    MetricSet, RateFit, RegimePolicy, Sequential, TerminalMoments,
};
pub use integrators::{
    effective_drift, fluctuation_drift_matrix, simulate_coupled, simulate_fluctuation_sde,
    simulate_limit_ode, simulate_sampled_ode, simulate_sampled_sde, step_sampled_sde, LimitScheme,
    Regime, Rescaling, SimulationConfig, StateSeries, TrajectoryBundle,
};
pub use linalg::Matrix;
pub use model::{
    builtin_pendulum, builtin_scalar_linear, check_jacobians, eval_gdk, GdkProduct, JacobianReport,
    JacobianSource, JacobianSources, Pendulum, ScalarLinear, SystemModel,
};
pub use noise::{generate_path, BrownianPath};
pub use time_grid::{build_grid, pi_delta, GridMode, TimeGrid};
