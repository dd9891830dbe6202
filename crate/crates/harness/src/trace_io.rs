//! Run traces on disk: a step CSV, a checkpoint CSV with the comparison
//! counts, and a JSON sidecar describing how the run was produced.

use std::fs;
use std::io::Write;
use std::path::Path;

use rucb_core::{Algorithm, RunTrace, StepRecord, RNG_ALGORITHM};
use serde::Serialize;

use crate::error::HarnessError;

pub const STEP_COLUMNS: [&str; 6] = ["t", "i", "j", "winner", "step_regret", "cum_regret"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Full,
    Checkpoints,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSidecar {
    pub algorithm: &'static str,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub k: usize,
    pub condorcet_winner: usize,
    pub horizon: u64,
    pub rng: &'static str,
    pub matrix_sha256: String,
    pub resolution: Resolution,
    pub checkpoints: Vec<u64>,
}

impl TraceSidecar {
    pub fn new(trace: &RunTrace, matrix_sha256: String, resolution: Resolution, checkpoints: &[u64]) -> Self {
        TraceSidecar {
            algorithm: trace.algorithm.name(),
            alpha: match trace.algorithm {
                Algorithm::Rucb { alpha } => Some(alpha),
                Algorithm::RandomPairing => None,
            },
            seed: trace.seed,
            k: trace.k,
            condorcet_winner: trace.winner,
            horizon: trace.steps_run,
            rng: RNG_ALGORITHM,
            matrix_sha256,
            resolution,
            checkpoints: checkpoints.to_vec(),
        }
    }
}

fn write_step(w: &mut csv::Writer<Vec<u8>>, s: &StepRecord) -> csv::Result<()> {
    w.write_record([
        s.t.to_string(),
        s.i.to_string(),
        s.j.to_string(),
        s.winner.to_string(),
        s.step_regret.to_string(),
        s.cum_regret.to_string(),
    ])
}

/// Step CSV. `Full` needs a trace recorded with steps; `Checkpoints` writes
/// the step that ended at each checkpoint.
pub fn trace_csv(trace: &RunTrace, resolution: Resolution) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| HarnessError::Config(format!("csv: {e}"));
    w.write_record(STEP_COLUMNS).map_err(wrap)?;
    match resolution {
        Resolution::Full => {
            if trace.steps.len() as u64 != trace.steps_run {
                return Err(HarnessError::Config("full trace requested but steps were not recorded".into()));
            }
            for s in &trace.steps {
                write_step(&mut w, s).map_err(wrap)?;
            }
        }
        Resolution::Checkpoints => {
            for c in &trace.checkpoints {
                write_step(&mut w, &c.step).map_err(wrap)?;
            }
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii"))
}

/// `t, cum_regret, best_arm, n_0_0, n_0_1, …` with row-major `N_ij(t)`.
pub fn checkpoint_csv(trace: &RunTrace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let k = trace.k;
    let mut header = vec!["t".to_string(), "cum_regret".into(), "best_arm".into()];
    for i in 0..k {
        for j in 0..k {
            header.push(format!("n_{i}_{j}"));
        }
    }
    w.write_record(&header).expect("writing to memory");
    for c in &trace.checkpoints {
        let mut row = vec![c.t.to_string(), c.cum_regret.to_string(), c.best_arm.to_string()];
        row.extend(c.comparisons.iter().map(u64::to_string));
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii")
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| HarnessError::io(path, e))
}

/// Writes `<stem>.csv`, `<stem>_checkpoints.csv` and `<stem>.json` into `dir`.
pub fn write_trace(dir: &Path, stem: &str, trace: &RunTrace, sidecar: &TraceSidecar) -> Result<(), HarnessError> {
    write_text(&dir.join(format!("{stem}.csv")), &trace_csv(trace, sidecar.resolution)?)?;
    write_text(&dir.join(format!("{stem}_checkpoints.csv")), &checkpoint_csv(trace))?;
    let json = serde_json::to_string_pretty(sidecar).expect("plain data serializes") + "\n";
    write_text(&dir.join(format!("{stem}.json")), &json)
}
