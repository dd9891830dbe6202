//! Simulation loop: policy → duel → update, with per-step regret and
//! checkpointed snapshots.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::baseline::RandomPairing;
use crate::duel::{stream_rng, DuelEnv, DuelError, POLICY_STREAM};
use crate::preference::{GapVector, MatrixError, PreferenceMatrix};
use crate::rucb::{RucbError, RucbState, WinMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Rucb(#[from] RucbError),
    #[error(transparent)]
    Duel(#[from] DuelError),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("checkpoints must be strictly increasing, positive and within the horizon (offending value {value})")]
    InvalidCheckpoints { value: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Rucb { alpha: f64 },
    RandomPairing,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Rucb { .. } => "rucb",
            Algorithm::RandomPairing => "random_pairing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub i: usize,
    pub j: usize,
    pub winner: usize,
    pub step_regret: f64,
    pub cum_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointRecord {
    pub t: u64,
    /// The step that ended at `t`.
    pub step: StepRecord,
    pub cum_regret: f64,
    pub best_arm: usize,
    /// Row-major `N_ij(t)`; the diagonal holds self-duel counts.
    pub comparisons: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub k: usize,
    pub winner: usize,
    /// Steps executed.
    pub steps_run: u64,
    /// Every step, when recording was requested; empty otherwise.
    pub steps: Vec<StepRecord>,
    pub checkpoints: Vec<CheckpointRecord>,
    pub final_cum_regret: f64,
}

impl RunTrace {
    pub fn checkpoint(&self, t: u64) -> Option<&CheckpointRecord> {
        self.checkpoints.iter().find(|c| c.t == t)
    }

    /// Fraction of the duels in `(from, to]` that were winner-vs-winner,
    /// read off the checkpoint snapshots at `from` and `to`. `from = 0`
    /// means the start of the run.
    pub fn winner_self_duel_fraction(&self, from: u64, to: u64) -> Option<f64> {
        let ww = self.winner * self.k + self.winner;
        let start = if from == 0 { 0 } else { self.checkpoint(from)?.comparisons[ww] };
        let end = self.checkpoint(to)?.comparisons[ww];
        (to > from).then(|| (end - start) as f64 / (to - from) as f64)
    }
}

/// Checks a checkpoint list against a horizon (`None` = unbounded).
pub fn validate_checkpoints(checkpoints: &[u64], horizon: Option<u64>) -> Result<(), RunError> {
    let mut prev = 0;
    for &c in checkpoints {
        if c <= prev || horizon.is_some_and(|h| c > h) {
            return Err(RunError::InvalidCheckpoints { value: c });
        }
        prev = c;
    }
    Ok(())
}

/// Called after every step with the updated counts.
pub trait StepObserver {
    fn on_step(&mut self, step: &StepRecord, wins: &WinMatrix);
}

impl StepObserver for () {
    fn on_step(&mut self, _: &StepRecord, _: &WinMatrix) {}
}

impl<A: StepObserver, B: StepObserver> StepObserver for (A, B) {
    fn on_step(&mut self, step: &StepRecord, wins: &WinMatrix) {
        self.0.on_step(step, wins);
        self.1.on_step(step, wins);
    }
}

#[derive(Debug, Clone)]
enum Policy {
    Rucb(RucbState),
    Random(RandomPairing),
}

/// A single seeded run that can be stepped indefinitely.
#[derive(Debug, Clone)]
pub struct Simulation {
    algorithm: Algorithm,
    seed: u64,
    env: DuelEnv,
    gaps: GapVector,
    policy: Policy,
    rng: ChaCha8Rng,
    cum_regret: f64,
}

impl Simulation {
    pub fn new(matrix: PreferenceMatrix, algorithm: Algorithm, seed: u64) -> Result<Self, RunError> {
        let gaps = matrix.gaps()?;
        let k = matrix.k();
        let policy = match algorithm {
            Algorithm::Rucb { alpha } => Policy::Rucb(RucbState::new(k, alpha)?),
            Algorithm::RandomPairing => Policy::Random(RandomPairing::new(k)),
        };
        Ok(Simulation {
            algorithm,
            seed,
            env: DuelEnv::new(matrix, seed),
            gaps,
            policy,
            rng: stream_rng(seed, POLICY_STREAM),
            cum_regret: 0.0,
        })
    }

    pub fn gaps(&self) -> &GapVector {
        &self.gaps
    }

    pub fn matrix(&self) -> &PreferenceMatrix {
        self.env.matrix()
    }

    /// Steps completed so far.
    pub fn t(&self) -> u64 {
        self.env.t()
    }

    pub fn cum_regret(&self) -> f64 {
        self.cum_regret
    }

    pub fn wins(&self) -> &WinMatrix {
        match &self.policy {
            Policy::Rucb(s) => s.wins(),
            Policy::Random(r) => r.wins(),
        }
    }

    pub fn best_arm(&self) -> usize {
        self.wins().best_arm()
    }

    pub fn step(&mut self) -> Result<StepRecord, RunError> {
        let outcome = match &mut self.policy {
            Policy::Rucb(state) => {
                let decision = state.select_pair(&mut self.rng);
                let outcome = self.env.duel(decision.c, decision.d)?;
                state.update(&decision, &outcome)?;
                outcome
            }
            Policy::Random(rp) => {
                let (i, j) = rp.next_pair(&mut self.rng);
                let outcome = self.env.duel(i, j)?;
                rp.observe(&outcome);
                outcome
            }
        };
        let step_regret = self.gaps.pair_gap(outcome.i, outcome.j);
        self.cum_regret += step_regret;
        Ok(StepRecord {
            t: outcome.t,
            i: outcome.i,
            j: outcome.j,
            winner: outcome.winner,
            step_regret,
            cum_regret: self.cum_regret,
        })
    }

    fn snapshot(&self, step: StepRecord) -> CheckpointRecord {
        CheckpointRecord {
            t: self.t(),
            step,
            cum_regret: self.cum_regret,
            best_arm: self.best_arm(),
            comparisons: self.wins().comparison_matrix(),
        }
    }

    /// Steps until `stop` returns true, snapshotting at `checkpoints`.
    pub fn run_until(
        mut self,
        checkpoints: &[u64],
        record_steps: bool,
        observer: &mut dyn StepObserver,
        mut stop: impl FnMut(&StepRecord) -> bool,
    ) -> Result<RunTrace, RunError> {
        validate_checkpoints(checkpoints, None)?;
        let mut steps = Vec::new();
        let mut snaps = Vec::with_capacity(checkpoints.len());
        let mut next = checkpoints.iter().copied().peekable();
        loop {
            let rec = self.step()?;
            observer.on_step(&rec, self.wins());
            if record_steps {
                steps.push(rec);
            }
            if next.peek() == Some(&rec.t) {
                next.next();
                snaps.push(self.snapshot(rec));
            }
            if stop(&rec) {
                break;
            }
        }
        Ok(RunTrace {
            algorithm: self.algorithm,
            seed: self.seed,
            k: self.matrix().k(),
            winner: self.gaps.winner,
            steps_run: self.t(),
            steps,
            checkpoints: snaps,
            final_cum_regret: self.cum_regret,
        })
    }
}

/// Parameters of one finite-horizon run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub horizon: u64,
    pub seed: u64,
    pub checkpoints: Vec<u64>,
    pub record_steps: bool,
}

pub fn run(matrix: &PreferenceMatrix, cfg: &RunConfig) -> Result<RunTrace, RunError> {
    run_observed(matrix, cfg, &mut ())
}

pub fn run_observed(
    matrix: &PreferenceMatrix,
    cfg: &RunConfig,
    observer: &mut dyn StepObserver,
) -> Result<RunTrace, RunError> {
    if cfg.horizon == 0 {
        return Err(RunError::ZeroHorizon);
    }
    validate_checkpoints(&cfg.checkpoints, Some(cfg.horizon))?;
    let horizon = cfg.horizon;
    Simulation::new(matrix.clone(), cfg.algorithm, cfg.seed)?.run_until(
        &cfg.checkpoints,
        cfg.record_steps,
        observer,
        |rec| rec.t >= horizon,
    )
}

/// RUCB run with a fixed horizon.
pub fn run_rucb(
    matrix: &PreferenceMatrix,
    alpha: f64,
    horizon: u64,
    seed: u64,
    checkpoints: &[u64],
) -> Result<RunTrace, RunError> {
    run(
        matrix,
        &RunConfig {
            algorithm: Algorithm::Rucb { alpha },
            horizon,
            seed,
            checkpoints: checkpoints.to_vec(),
            record_steps: true,
        },
    )
}

pub fn random_pairing_run(matrix: &PreferenceMatrix, seed: u64, horizon: u64) -> Result<RunTrace, RunError> {
    run(
        matrix,
        &RunConfig {
            algorithm: Algorithm::RandomPairing,
            horizon,
            seed,
            checkpoints: alloc::vec![horizon],
            record_steps: true,
        },
    )
}
