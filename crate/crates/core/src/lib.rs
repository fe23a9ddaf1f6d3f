//! Batch scheduling for random linear network coding broadcast.
//!
//! A base station sends an `F`-packet file to `N` receivers over independent
//! ON/OFF channels, coding within consecutive batches of `K` packets. This
//! crate provides:
//!
//! * [`dp`]: the exact two-receiver MDP solution, with checks that the
//!   Least-Received policy is optimal and a brute-force policy enumerator;
//! * [`sim`]: a Monte Carlo simulator comparing Least-Received, round robin
//!   and random selection for any `N`;
//! * [`rlnc`]: a GF(256) encoder and Gauss-Jordan decoder that can replace
//!   the simulator's "every packet is innovative" assumption.
//!
//! Trial-level parallelism uses rayon when the default `parallel` feature is
//! enabled and falls back to sequential loops otherwise. Results do not
//! depend on which path ran.

pub mod dp;
pub mod error;
pub mod mdp;
pub mod model;
pub mod par;
pub mod policies;
pub mod rlnc;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use model::SystemConfig;
pub use par::Execution;
pub use policies::PolicyKind;
pub use rng::RngSpec;
pub use sim::Mode;
