//! Seeded batches of runs and their aggregates.
//!
//! Run `r` uses seed `seed_base + r`. Runs execute on a rayon pool but
//! results are collected and folded in run-index order, so the bytes written
//! do not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rucb_core::run::{run, RunConfig};
use rucb_core::{PreferenceMatrix, RunTrace};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::matrix_io;
use crate::trace_io::{self, Resolution, TraceSidecar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointAggregate {
    pub t: u64,
    pub mean_regret: f64,
    pub min_regret: f64,
    pub max_regret: f64,
    /// Fraction of runs whose best arm at `t` is the Condorcet winner.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub algorithm: &'static str,
    pub alpha: Option<f64>,
    pub runs: u64,
    pub horizon: u64,
    pub seed_base: u64,
    pub k: usize,
    pub condorcet_winner: usize,
    pub matrix_sha256: String,
    pub checkpoints: Vec<CheckpointAggregate>,
}

impl AggregateResult {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "mean_regret", "min_regret", "max_regret", "accuracy"])
            .expect("writing to memory");
        for c in &self.checkpoints {
            w.write_record([
                c.t.to_string(),
                c.mean_regret.to_string(),
                c.min_regret.to_string(),
                c.max_regret.to_string(),
                c.accuracy.to_string(),
            ])
            .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes") + "\n"
    }
}

/// Folds traces in the order given. Every trace must carry the same
/// checkpoint schedule.
pub fn aggregate(traces: &[RunTrace], checkpoints: &[u64]) -> Vec<CheckpointAggregate> {
    let n = traces.len() as f64;
    checkpoints
        .iter()
        .enumerate()
        .map(|(c, &t)| {
            let mut sum = 0.0;
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut hits = 0u64;
            for tr in traces {
                let cp = &tr.checkpoints[c];
                debug_assert_eq!(cp.t, t);
                sum += cp.cum_regret;
                min = min.min(cp.cum_regret);
                max = max.max(cp.cum_regret);
                hits += u64::from(cp.best_arm == tr.winner);
            }
            // Keeps min <= mean <= max exact when rounding nudges the mean.
            let mean = (sum / n).clamp(min, max);
            CheckpointAggregate {
                t,
                mean_regret: mean,
                min_regret: min,
                max_regret: max,
                accuracy: hits as f64 / n,
            }
        })
        .collect()
}

fn create_dir(path: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(path).map_err(|e| HarnessError::io(path, e))
}

/// Where a config's outputs land.
pub fn output_dir(cfg: &ExperimentConfig, base: &Path) -> PathBuf {
    base.join(&cfg.output_dir)
}

/// Runs every seed, writes traces under `output_dir/traces`, and writes
/// `aggregate.csv`, `aggregate.json` and a copy of the config.
pub fn run_experiment(cfg: &ExperimentConfig, base: &Path) -> Result<AggregateResult, HarnessError> {
    cfg.validate()?;
    let matrix = cfg.matrix.load(base)?;
    run_experiment_on(cfg, &matrix, &output_dir(cfg, base))
}

pub fn run_experiment_on(
    cfg: &ExperimentConfig,
    matrix: &PreferenceMatrix,
    out: &Path,
) -> Result<AggregateResult, HarnessError> {
    cfg.validate()?;
    let checkpoints = cfg.checkpoint_list();
    let full = cfg.full_trace();
    let resolution = if full { Resolution::Full } else { Resolution::Checkpoints };
    let hash = matrix_io::matrix_hash(matrix);
    let trace_dir = out.join("traces");
    create_dir(&trace_dir)?;

    let one = |r: u64| -> Result<RunTrace, HarnessError> {
        let mut trace = run(
            matrix,
            &RunConfig {
                algorithm: cfg.algorithm(),
                horizon: cfg.horizon,
                seed: cfg.seed_base + r,
                checkpoints: checkpoints.clone(),
                record_steps: full,
            },
        )?;
        let sidecar = TraceSidecar::new(&trace, hash.clone(), resolution, &checkpoints);
        trace_io::write_trace(&trace_dir, &format!("run_{r:04}"), &trace, &sidecar)?;
        trace.steps = Vec::new();
        Ok(trace)
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
    let traces: Vec<RunTrace> = pool.install(|| (0..cfg.runs).into_par_iter().map(one).collect::<Result<_, _>>())?;

    let winner = traces[0].winner;
    let result = AggregateResult {
        algorithm: cfg.algorithm().name(),
        alpha: cfg.alpha.filter(|_| matches!(cfg.algorithm(), rucb_core::Algorithm::Rucb { .. })),
        runs: cfg.runs,
        horizon: cfg.horizon,
        seed_base: cfg.seed_base,
        k: matrix.k(),
        condorcet_winner: winner,
        matrix_sha256: hash,
        checkpoints: aggregate(&traces, &checkpoints),
    };
    trace_io::write_text(&out.join("aggregate.csv"), &result.to_csv())?;
    trace_io::write_text(&out.join("aggregate.json"), &result.to_json())?;
    trace_io::write_text(&out.join("config.json"), &cfg.to_json())?;
    Ok(result)
}
