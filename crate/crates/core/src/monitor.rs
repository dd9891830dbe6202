//! Step observers that test the high-probability guarantees on live runs.

use alloc::vec::Vec;

use crate::bounds::{self, BoundError, BoundParams};
use crate::math;
use crate::preference::PreferenceMatrix;
use crate::rucb::{OptimisticMatrix, WinMatrix};
use crate::run::{StepObserver, StepRecord};

/// A step at which some `p_ij` fell outside `[l_ij(t), u_ij(t)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageViolation {
    pub t: u64,
    pub i: usize,
    pub j: usize,
    pub l: f64,
    pub u: f64,
    pub p: f64,
}

/// Watches `p_ij ∈ [l_ij(t), u_ij(t)]` for every pair at every `t > C(δ)`,
/// where `u` and `l` use the counts after `t` duels. Works for any policy.
#[derive(Debug, Clone)]
pub struct CoverageMonitor {
    p: PreferenceMatrix,
    alpha: f64,
    after: f64,
    first_violation: Option<CoverageViolation>,
}

impl CoverageMonitor {
    /// Monitors steps `t > after`.
    pub fn new(matrix: PreferenceMatrix, alpha: f64, after: f64) -> Self {
        CoverageMonitor {
            p: matrix,
            alpha,
            after,
            first_violation: None,
        }
    }

    /// Monitors steps `t > C(δ)` for the given parameters.
    pub fn from_params(matrix: PreferenceMatrix, params: &BoundParams) -> Self {
        let after = bounds::c_delta(params);
        CoverageMonitor::new(matrix, params.alpha(), after)
    }

    pub fn violated(&self) -> bool {
        self.first_violation.is_some()
    }

    pub fn first_violation(&self) -> Option<CoverageViolation> {
        self.first_violation
    }
}

impl StepObserver for CoverageMonitor {
    fn on_step(&mut self, step: &StepRecord, wins: &WinMatrix) {
        if self.first_violation.is_some() || (step.t as f64) <= self.after {
            return;
        }
        let u = OptimisticMatrix::from_wins(wins, self.alpha, step.t);
        let k = self.p.k();
        // G_ij = G_ji and G_ii always holds, so i < j suffices.
        for i in 0..k {
            for j in (i + 1)..k {
                let p = self.p.p(i, j);
                if !u.covers(i, j, p) {
                    self.first_violation = Some(CoverageViolation {
                        t: step.t,
                        i,
                        j,
                        l: u.l(i, j),
                        u: u.u(i, j),
                        p,
                    });
                    return;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountViolation {
    pub t: u64,
    pub i: usize,
    pub j: usize,
    pub count: u64,
    pub bound: f64,
}

/// Watches `N_ij(t) <= max{C(δ), D_ij ln t}` for every pair other than
/// (winner, winner). Only the dueled pair's count changes in a step and the
/// cap is nondecreasing in `t`, so checking that pair each step covers all
/// pairs at all times.
#[derive(Debug, Clone)]
pub struct CountBoundMonitor {
    k: usize,
    winner: usize,
    c: f64,
    d: Vec<f64>,
    first_violation: Option<CountViolation>,
    late_loser_self_duels: u64,
}

impl CountBoundMonitor {
    pub fn new(params: &BoundParams) -> Self {
        CountBoundMonitor {
            k: params.k(),
            winner: params.gaps().winner,
            c: bounds::c_delta(params),
            d: bounds::d_matrix(params),
            first_violation: None,
            late_loser_self_duels: 0,
        }
    }

    pub fn violated(&self) -> bool {
        self.first_violation.is_some()
    }

    pub fn first_violation(&self) -> Option<CountViolation> {
        self.first_violation
    }

    /// Self-duels of non-winner arms at `t > C(δ)`.
    pub fn late_loser_self_duels(&self) -> u64 {
        self.late_loser_self_duels
    }

    pub fn cap(&self, i: usize, j: usize, t: u64) -> f64 {
        self.c.max(self.d[i * self.k + j] * math::ln(t as f64))
    }
}

impl StepObserver for CountBoundMonitor {
    fn on_step(&mut self, step: &StepRecord, wins: &WinMatrix) {
        let (i, j) = (step.i, step.j);
        if i == j && i == self.winner {
            return;
        }
        if i == j && (step.t as f64) > self.c {
            self.late_loser_self_duels += 1;
        }
        if self.first_violation.is_none() {
            let count = wins.comparisons(i, j);
            let bound = self.cap(i, j, step.t);
            if count as f64 > bound {
                self.first_violation = Some(CountViolation {
                    t: step.t,
                    i,
                    j,
                    count,
                    bound,
                });
            }
        }
    }
}

/// Bound parameters for a matrix with a Condorcet winner.
pub fn params_for(matrix: &PreferenceMatrix, alpha: f64, delta: f64) -> Result<BoundParams, BoundError> {
    let gaps = matrix.gaps().map_err(|_| BoundError::NoCondorcetWinner)?;
    BoundParams::new(alpha, delta, gaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preference::generate_planted;
    use crate::run::{run_observed, Algorithm, RunConfig};

    #[test]
    fn coverage_holds_trivially_before_c_delta() {
        let m = generate_planted(4, 0.15, 0.3, 3).unwrap();
        let mut mon = CoverageMonitor::new(m.clone(), 1.0, f64::INFINITY);
        let cfg = RunConfig {
            algorithm: Algorithm::RandomPairing,
            horizon: 2000,
            seed: 1,
            checkpoints: vec![],
            record_steps: false,
        };
        run_observed(&m, &cfg, &mut mon).unwrap();
        assert!(!mon.violated());
    }

    #[test]
    fn coverage_violation_detected_with_tiny_alpha() {
        // With a negligible bonus the interval collapses onto the empirical
        // mean, which misses p almost surely.
        let m = generate_planted(3, 0.15, 0.3, 3).unwrap();
        let mut mon = CoverageMonitor::new(m.clone(), 1e-9, 10.0);
        let cfg = RunConfig {
            algorithm: Algorithm::RandomPairing,
            horizon: 5000,
            seed: 2,
            checkpoints: vec![],
            record_steps: false,
        };
        run_observed(&m, &cfg, &mut mon).unwrap();
        let v = mon.first_violation().expect("violation");
        assert!(v.p < v.l || v.p > v.u);
        assert!(v.t > 10);
    }

    #[test]
    fn count_monitor_flags_overdueling() {
        // Random pairing keeps dueling loser pairs linearly, so with δ = 1 and
        // a long horizon it must exceed the logarithmic cap.
        let m = generate_planted(3, 0.3, 0.45, 5).unwrap();
        let params = params_for(&m, 2.0, 1.0).unwrap();
        let mut mon = CountBoundMonitor::new(&params);
        let cfg = RunConfig {
            algorithm: Algorithm::RandomPairing,
            horizon: 20_000,
            seed: 4,
            checkpoints: vec![],
            record_steps: false,
        };
        run_observed(&m, &cfg, &mut mon).unwrap();
        assert!(mon.violated(), "cap at 2e4 = {}", mon.cap(1, 2, 20_000));
    }
}
