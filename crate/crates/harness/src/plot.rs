//! Plot-ready CSVs. Checkpoints are positive, so both files can go straight
//! onto log axes.

use std::path::{Path, PathBuf};

use rucb_core::bounds::{self, BoundError, BoundParams};

use crate::error::HarnessError;
use crate::experiment::AggregateResult;
use crate::trace_io::write_text;

/// A theory curve added as an extra column of `regret.csv`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundOverlay {
    HighProbability(BoundParams),
    Expected(BoundParams),
}

impl BoundOverlay {
    pub fn column(&self) -> &'static str {
        match self {
            BoundOverlay::HighProbability(_) => "high_prob_bound",
            BoundOverlay::Expected(_) => "expected_bound",
        }
    }

    pub fn value(&self, t: u64) -> Result<f64, BoundError> {
        match self {
            BoundOverlay::HighProbability(p) => bounds::high_prob_regret_curve(p, t),
            BoundOverlay::Expected(p) => bounds::expected_regret_bound(p, t),
        }
    }
}

/// Writes `regret.csv` (checkpoint, mean, min, max, overlays…) and
/// `accuracy.csv` (checkpoint, accuracy) into `dir`.
pub fn emit_plot_data(
    result: &AggregateResult,
    overlays: &[BoundOverlay],
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    if result.checkpoints.is_empty() {
        return Err(HarnessError::Config("no checkpoints to plot".into()));
    }
    let mut header = vec!["checkpoint", "mean", "min", "max"];
    header.extend(overlays.iter().map(BoundOverlay::column));
    let mut regret = csv::Writer::from_writer(Vec::new());
    regret.write_record(&header).expect("writing to memory");
    let mut accuracy = csv::Writer::from_writer(Vec::new());
    accuracy.write_record(["checkpoint", "accuracy"]).expect("writing to memory");
    for c in &result.checkpoints {
        let mut row = vec![
            c.t.to_string(),
            c.mean_regret.to_string(),
            c.min_regret.to_string(),
            c.max_regret.to_string(),
        ];
        for o in overlays {
            row.push(o.value(c.t)?.to_string());
        }
        regret.write_record(&row).expect("writing to memory");
        accuracy
            .write_record([c.t.to_string(), c.accuracy.to_string()])
            .expect("writing to memory");
    }
    let files = [
        (dir.join("regret.csv"), regret.into_inner().expect("flush to memory")),
        (dir.join("accuracy.csv"), accuracy.into_inner().expect("flush to memory")),
    ];
    let mut paths = Vec::new();
    for (path, bytes) in files {
        write_text(&path, std::str::from_utf8(&bytes).expect("ascii"))?;
        paths.push(path);
    }
    Ok(paths)
}
