//! Seeded duel oracle over a fixed preference matrix.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::preference::{GapVector, PreferenceMatrix};

/// Identifier recorded in run sidecars. Every random stream in a run is a
/// ChaCha8 generator from `rand_chacha` 0.3, built with `seed_from_u64(seed)`
/// and separated by `set_stream`: stream 0 draws duel outcomes, stream 1
/// drives the policy (champion draws and tie breaks). Uniform floats come
/// from `rand` 0.8's `Standard` distribution.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.3/seed_from_u64/stream0=duels,stream1=policy";

pub const DUEL_STREAM: u64 = 0;
pub const POLICY_STREAM: u64 = 1;

/// Generator for one named stream of a seeded run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DuelError {
    #[error("arm {arm} out of range for {k} arms")]
    IndexOutOfRange { arm: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuelOutcome {
    pub i: usize,
    pub j: usize,
    pub winner: usize,
    /// 1-based timestep of the duel.
    pub t: u64,
}

impl DuelOutcome {
    pub fn loser(&self) -> usize {
        if self.winner == self.i {
            self.j
        } else {
            self.i
        }
    }

    pub fn is_self_duel(&self) -> bool {
        self.i == self.j
    }
}

/// Owns the matrix, the duel RNG stream and the step counter.
#[derive(Debug, Clone)]
pub struct DuelEnv {
    matrix: PreferenceMatrix,
    rng: ChaCha8Rng,
    t: u64,
}

impl DuelEnv {
    pub fn new(matrix: PreferenceMatrix, seed: u64) -> Self {
        DuelEnv {
            matrix,
            rng: stream_rng(seed, DUEL_STREAM),
            t: 0,
        }
    }

    pub fn matrix(&self) -> &PreferenceMatrix {
        &self.matrix
    }

    /// Number of duels played so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Arm `i` wins with probability `p_ij`. One uniform draw per call,
    /// self-duels included, so the stream position depends only on the
    /// number of duels.
    pub fn duel(&mut self, i: usize, j: usize) -> Result<DuelOutcome, DuelError> {
        let k = self.matrix.k();
        for arm in [i, j] {
            if arm >= k {
                return Err(DuelError::IndexOutOfRange { arm, k });
            }
        }
        let u: f64 = self.rng.gen();
        self.t += 1;
        let winner = if i == j || u < self.matrix.p(i, j) { i } else { j };
        Ok(DuelOutcome {
            i,
            j,
            winner,
            t: self.t,
        })
    }
}

/// `(Δ_i + Δ_j) / 2`.
#[inline]
pub fn step_regret(gaps: &GapVector, i: usize, j: usize) -> f64 {
    gaps.pair_gap(i, j)
}
