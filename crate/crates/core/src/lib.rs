//! Relative Upper Confidence Bound (RUCB) for the K-armed dueling bandit
//! problem.
//!
//! The crate is `no_std` with `alloc`. It holds everything that is pure
//! computation:
//!
//! * [`preference`]: preference matrices, Condorcet/Borda winners, gaps,
//!   transitivity analysis and synthetic generators.
//! * [`condorcet`]: exact subset counting for the probability that a random
//!   K-subset has a Condorcet winner, plus a Monte Carlo total-order estimate.
//! * [`duel`]: the seeded duel oracle and per-step regret.
//! * [`rucb`]: the RUCB state machine (optimistic matrix, champion pool,
//!   challenger selection, win updates, best-arm rule).
//! * [`baseline`]: a uniform random pairing policy.
//! * [`run`]: the simulation loop producing a [`run::RunTrace`].
//! * [`bounds`]: closed-form regret and comparison-count bounds.
//! * [`monitor`]: step observers that check confidence-interval coverage and
//!   comparison-count bounds on live runs.
//! * [`posterior`]: exact Beta/binomial tail oracles and lemma verifiers.
//!
//! IO, file formats and the CLI live in the `rucb-harness` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baseline;
pub mod bounds;
pub mod condorcet;
pub mod duel;
pub mod monitor;
pub mod posterior;
pub mod preference;
pub mod rucb;
pub mod run;

mod math;

pub use duel::{DuelEnv, DuelOutcome, RNG_ALGORITHM};
pub use preference::{GapVector, MatrixError, PreferenceMatrix};
pub use rucb::{OptimisticMatrix, RucbError, RucbState, StepDecision, WinMatrix};
pub use run::{Algorithm, CheckpointRecord, RunError, RunTrace, StepRecord};
