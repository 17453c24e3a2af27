//! Two-state continuous-time Markov chains with time-periodic transition rates.
//!
//! A chain jumps between the states `-1` and `+1` with `T`-periodic exit rates
//! `phi_minus(t)` (leaving `-1`) and `phi_plus(t)` (leaving `+1`). This crate
//! computes the objects that describe its long-time behaviour:
//!
//! * [`rates`] — periodic rate functions (`RateSpec`): evaluation, integrals,
//!   suprema and discontinuity structure. All other modules consume this.
//! * [`pspm`] — the periodic stationary probability measure, the second
//!   Floquet exponent of the distribution flow, and a fixed-step integrator
//!   for evolving arbitrary initial distributions.
//! * [`discrete`] — the discrete-time approximation chain: stationary
//!   measure, monodromy product over one period, eigenvalue identities, and
//!   the convergence checks toward the continuous objects.
//! * [`genfun`] — the moment generating function of the up-crossing count,
//!   its ODE monodromy and Floquet spectrum, and the closed-form mean
//!   exponent, kept side by side.
//! * [`montecarlo`] — exact-in-distribution path simulation with reproducible
//!   per-path random streams, serving as the statistical oracle.
//! * [`resonance`] — stochastic-resonance tuning: closed forms for the
//!   half-period and constant-trace forcing families, the quality measure,
//!   the optimal-period solver and its small-noise asymptotic, and the cubic
//!   frequency tuner.
//! * [`cli`] — the command-line front end (`pspm`, `floquet`, `discrete`,
//!   `simulate`, `tune-a`, `tune-b`, `figure1`, `sweep`).
//!
//! Start with the runnable examples (`cargo run --example pspm_profile`) or
//! the README for the CLI surface.

pub mod cli;
pub mod discrete;
pub mod genfun;
pub mod linalg;
pub mod montecarlo;
pub mod pspm;
pub mod rates;
pub mod resonance;

mod ode;
mod quad;
mod roots;

pub use linalg::{Mat2, StateVec};
pub use rates::{RateBounds, RateSelector, RateSpec, Rates};

/// Default number of integrator steps per period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4096;

/// Absolute shift above which a Richardson step-halving check reports a
/// resolution warning.
pub const RESOLUTION_WARNING_THRESHOLD: f64 = 1e-10;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A rate specification failed validation at construction.
    #[error("invalid rate spec: {0}")]
    InvalidSpec(String),
    /// An operation argument violated its precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The input makes the requested quantity undefined (e.g. measuring a
    /// decay rate from an initial condition already on the periodic solution).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// An eigenvector projection is too ill-conditioned to trust.
    #[error("ill-conditioned projection: eigenvector condition number {0:.3e} exceeds 1e12")]
    IllConditioned(f64),
    /// Bracket expansion never straddled the target value.
    #[error("bracket failure: {0}")]
    BracketFailure(String),
    /// A resource cap was exceeded (e.g. expected jump count of a simulation).
    #[error("resource cap exceeded: {0}")]
    ResourceExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// `true` for finite, strictly positive values — the validation test used
/// throughout (rejects NaN by construction).
pub(crate) fn positive_finite(v: f64) -> bool {
    v.is_finite() && v > 0.0
}
