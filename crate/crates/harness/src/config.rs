//! JSON experiment configs.
//!
//! ```json
//! {
//!   "matrix": {"planted": {"k": 16, "delta_min": 0.1, "delta_max": 0.3, "seed": 16}},
//!   "algorithm": "rucb",
//!   "alpha": 0.51,
//!   "runs": 100,
//!   "horizon": 100000,
//!   "seed_base": 1000,
//!   "checkpoints": {"log_spaced": {"count": 20, "start": 10}},
//!   "output_dir": "out",
//!   "workers": 4,
//!   "full_trace": false
//! }
//! ```
//!
//! `matrix` may also be `{"file": "m.csv"}` or `{"cycle": {"k": 5}}`, and
//! `checkpoints` may be `{"explicit": [10, 100, 1000]}`. Relative paths are
//! resolved against the config file's directory. `workers` defaults to the
//! number of CPUs; `full_trace` defaults to true for horizons up to 10^6.

use std::fs;
use std::path::{Path, PathBuf};

use rucb_core::preference::{generate_cycle, generate_planted};
use rucb_core::{Algorithm, PreferenceMatrix};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::matrix_io;

/// Horizons above this persist checkpoint rows only unless `full_trace` is set.
pub const FULL_TRACE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSource {
    File(PathBuf),
    Planted {
        k: usize,
        delta_min: f64,
        delta_max: f64,
        seed: u64,
    },
    Cycle {
        k: usize,
    },
}

impl MatrixSource {
    pub fn load(&self, base: &Path) -> Result<PreferenceMatrix, HarnessError> {
        match self {
            MatrixSource::File(p) => matrix_io::read_matrix(&base.join(p)),
            MatrixSource::Planted {
                k,
                delta_min,
                delta_max,
                seed,
            } => Ok(generate_planted(*k, *delta_min, *delta_max, *seed)?),
            MatrixSource::Cycle { k } => Ok(generate_cycle(*k)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    Rucb,
    RandomPairing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckpointSchedule {
    LogSpaced {
        count: usize,
        #[serde(default = "default_start")]
        start: u64,
    },
    Explicit(Vec<u64>),
}

fn default_start() -> u64 {
    10
}

/// `count` points geometrically spaced from `start` to `end` inclusive,
/// rounded to integers; duplicates from rounding are dropped.
pub fn log_spaced(start: u64, end: u64, count: usize) -> Vec<u64> {
    if count == 0 || start == 0 || start > end {
        return Vec::new();
    }
    if count == 1 || start == end {
        return vec![end];
    }
    let (a, b) = ((start as f64).ln(), (end as f64).ln());
    let mut out: Vec<u64> = Vec::with_capacity(count);
    for i in 0..count {
        let t = if i + 1 == count {
            end
        } else {
            (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as u64
        };
        if out.last().is_none_or(|&l| t > l) {
            out.push(t);
        }
    }
    out
}

impl CheckpointSchedule {
    pub fn resolve(&self, horizon: u64) -> Vec<u64> {
        match self {
            CheckpointSchedule::LogSpaced { count, start } => log_spaced(*start, horizon, *count),
            CheckpointSchedule::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub matrix: MatrixSource,
    pub algorithm: AlgorithmName,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub runs: u64,
    pub horizon: u64,
    pub seed_base: u64,
    pub checkpoints: CheckpointSchedule,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub full_trace: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes") + "\n"
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        match (self.algorithm, self.alpha) {
            (AlgorithmName::Rucb, None) => return bad("rucb needs alpha".into()),
            (AlgorithmName::Rucb, Some(a)) if !(a > 0.5) => return bad(format!("alpha must exceed 1/2, got {a}")),
            _ => {}
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if let CheckpointSchedule::LogSpaced { count, start } = self.checkpoints {
            if count == 0 || start == 0 || start > self.horizon {
                return bad(format!("log_spaced needs count >= 1 and 1 <= start <= horizon, got count={count} start={start}"));
            }
        }
        let cps = self.checkpoint_list();
        rucb_core::run::validate_checkpoints(&cps, Some(self.horizon))
            .map_err(|e| HarnessError::Config(format!("checkpoints: {e}")))?;
        if cps.is_empty() {
            return bad("at least one checkpoint is required".into());
        }
        Ok(())
    }

    pub fn checkpoint_list(&self) -> Vec<u64> {
        self.checkpoints.resolve(self.horizon)
    }

    pub fn algorithm(&self) -> Algorithm {
        match self.algorithm {
            AlgorithmName::Rucb => Algorithm::Rucb {
                alpha: self.alpha.unwrap_or(f64::NAN),
            },
            AlgorithmName::RandomPairing => Algorithm::RandomPairing,
        }
    }

    pub fn full_trace(&self) -> bool {
        self.full_trace.unwrap_or(self.horizon <= FULL_TRACE_LIMIT)
    }
}
