//! Simulation of semi-Markov processes and Monte Carlo diagnostics for
//! tightness of families of their laws on the Skorokhod space `D[0, ∞)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernels`]: holding-time laws `F_x`, Markov transition kernels
//!   `P(x, ·)` and product semi-Markov models `Q(x, B, t) = P(x, B) F_x(t)`.
//! - [`renewal`]: the Markov renewal chain `(x_n, τ_n)`, càdlàg jump paths
//!   `x(t) = x_{ν(t)}` and forward jump times.
//! - [`skorokhod`]: exact path functionals (`w'(δ; T)`, oscillation times,
//!   sup-norms) on piecewise-constant paths.
//! - [`diagnostics`]: estimators and verdict tables for the submartingale
//!   condition, the jump-gap functional `d^u_x(t)`, compact containment, the
//!   compensating operator and its martingale.
//! - [`scaling`]: space-time scaled families `x(a_n t) / b_n` and the
//!   closed-form overshoot bound `J_n(t)`.
//! - [`counterexample`]: the two-atom family for which the discrete
//!   submartingale condition holds but tightness fails.
//! - [`cli`]: the config-driven experiment runner behind the `smtight` binary.
//!
//! Every Monte Carlo routine draws from [`RngStreams`], so results depend only
//! on the master seed and never on the number of rayon workers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod counterexample;
pub mod diagnostics;
mod error;
pub mod kernels;
pub mod numeric;
pub mod renewal;
pub mod report;
mod rng;
pub mod scaling;
pub mod skorokhod;
mod state;

pub use error::{Error, Result};
pub use kernels::{HoldingTime, Law, SemiMarkovModel, TransitionKernel};
pub use renewal::{ForwardJump, JumpPath, RenewalRecord, Truncation};
pub use report::{Row, Table, Verdict};
pub use rng::RngStreams;
pub use state::State;

/// Default cap on the number of jumps simulated for one path.
pub const DEFAULT_STEP_LIMIT: usize = 1_000_000;
