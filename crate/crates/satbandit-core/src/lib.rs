//! Simulation kernel for satisficing bandits in piecewise-stationary
//! environments.
//!
//! The crate provides:
//!
//! - [`env`](mod@env): mean schedules, reward sampling, satisficing regret,
//!   and the structural assumption checks (realizability,
//!   always-realizability, no down-crossing);
//! - [`windowed`]: dyadic suffix-window statistics and the windowed
//!   confidence bounds used by the leader-based policy;
//! - [`policies`]: the windowed leader policy, the empirical-mean threshold
//!   policy, and baselines, plus the episode runner;
//! - [`instances`]: generators for the swap-window and single-switch
//!   hard-instance families and the alternating two-armed class;
//! - [`estimators`]: transcript-side change-point estimators and the
//!   per-block information budget;
//! - [`bounds`]: closed-form evaluators (Gaussian KL, Fano right-hand
//!   sides, regret bound formulas).
//!
//! Everything here is deterministic given the caller-supplied RNG streams
//! and is `no_std`-compatible (requires `alloc`). IO, configuration, and
//! parallel replication live in the companion `satbandit` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod env;
pub mod error;
pub mod estimators;
pub mod instances;
pub mod policies;
pub mod windowed;

mod math;

pub use error::{Error, Result};
