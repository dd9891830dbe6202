//! The RUCB state machine.
//!
//! Each iteration builds the optimistic matrix
//! `u_ij = w_ij / N_ij + sqrt(α ln t / N_ij)` (with `x/0 := 1` for both
//! quotients and `u_ii = 1/2`), draws a champion `c` among arms whose row is
//! entirely `>= 1/2`, picks the challenger `d = argmax_j u_jc`, duels them,
//! and records the winner.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::duel::DuelOutcome;
use crate::math;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RucbError {
    #[error("alpha = {alpha} must exceed 1/2")]
    AlphaTooSmall { alpha: f64 },
    #[error("arm count must be at least 1")]
    NoArms,
    #[error("outcome for pair ({got_i}, {got_j}) does not match decision ({c}, {d})")]
    PairMismatch {
        c: usize,
        d: usize,
        got_i: usize,
        got_j: usize,
    },
}

/// Win counts `w_ij` plus per-arm self-duel counts.
///
/// Self-duels carry no information about `P` and never touch `w`; they are
/// kept separately because the comparison-count bound also covers `N_ii`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinMatrix {
    k: usize,
    wins: Vec<u64>,
    self_duels: Vec<u64>,
}

impl WinMatrix {
    pub fn new(k: usize) -> Self {
        WinMatrix {
            k,
            wins: vec![0; k * k],
            self_duels: vec![0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn wins(&self, i: usize, j: usize) -> u64 {
        self.wins[i * self.k + j]
    }

    /// `N_ij`: duels between `i` and `j`. On the diagonal this is the number
    /// of self-duels of `i`.
    #[inline]
    pub fn comparisons(&self, i: usize, j: usize) -> u64 {
        if i == j {
            self.self_duels[i]
        } else {
            self.wins(i, j) + self.wins(j, i)
        }
    }

    /// Full symmetric `N` matrix, row-major.
    pub fn comparison_matrix(&self) -> Vec<u64> {
        let k = self.k;
        let mut n = vec![0; k * k];
        for i in 0..k {
            for j in 0..k {
                n[i * k + j] = self.comparisons(i, j);
            }
        }
        n
    }

    /// Sum of all `w_ij`: the number of informative duels.
    pub fn informative_duels(&self) -> u64 {
        self.wins.iter().sum()
    }

    pub fn record(&mut self, outcome: &DuelOutcome) {
        if outcome.is_self_duel() {
            self.self_duels[outcome.i] += 1;
        } else {
            self.wins[outcome.winner * self.k + outcome.loser()] += 1;
        }
    }

    /// Arm that beats the most arms by empirical majority, counting an
    /// uncompared pair as a win (`x/0 := 1`). Ties go to the lowest index.
    pub fn best_arm(&self) -> usize {
        let mut best = 0;
        let mut best_count = 0;
        for c in 0..self.k {
            let count = (0..self.k)
                .filter(|&j| {
                    if j == c {
                        return false;
                    }
                    let (w, n) = (self.wins(c, j), self.comparisons(c, j));
                    n == 0 || 2 * w > n
                })
                .count();
            if c == 0 || count > best_count {
                best = c;
                best_count = count;
            }
        }
        best
    }
}

/// Upper confidence matrix `U` for a given win matrix, `α` and `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticMatrix {
    k: usize,
    u: Vec<f64>,
}

impl OptimisticMatrix {
    /// Value used for both `x/0` quotients, giving `u = 2` on uncompared pairs.
    pub const UNCOMPARED_QUOTIENT: f64 = 1.0;

    /// Builds `U` from the counts. `α` is not checked here so the same
    /// construction serves confidence-interval checks for any algorithm.
    pub fn from_wins(wins: &WinMatrix, alpha: f64, t: u64) -> Self {
        let k = wins.k();
        let mut u = vec![0.5; k * k];
        let ln_t = math::ln(t as f64);
        for i in 0..k {
            for j in (i + 1)..k {
                let n = wins.comparisons(i, j);
                let (uij, uji) = if n == 0 {
                    let v = 2.0 * Self::UNCOMPARED_QUOTIENT;
                    (v, v)
                } else {
                    let nf = n as f64;
                    let bonus = math::sqrt(alpha * ln_t / nf);
                    (wins.wins(i, j) as f64 / nf + bonus, wins.wins(j, i) as f64 / nf + bonus)
                };
                u[i * k + j] = uij;
                u[j * k + i] = uji;
            }
        }
        OptimisticMatrix { k, u }
    }

    /// From an explicit row-major `u`; the diagonal is forced to 1/2.
    pub fn from_raw(k: usize, mut u: Vec<f64>) -> Self {
        assert_eq!(u.len(), k * k, "u must be k*k");
        for i in 0..k {
            u[i * k + i] = 0.5;
        }
        OptimisticMatrix { k, u }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn u(&self, i: usize, j: usize) -> f64 {
        self.u[i * self.k + j]
    }

    /// Lower confidence value, `l_ij = 1 - u_ji`.
    #[inline]
    pub fn l(&self, i: usize, j: usize) -> f64 {
        1.0 - self.u(j, i)
    }

    pub fn covers(&self, i: usize, j: usize, p: f64) -> bool {
        self.l(i, j) <= p && p <= self.u(i, j)
    }

    /// Arms whose whole row is `>= 1/2`.
    pub fn champion_pool(&self) -> Vec<usize> {
        (0..self.k)
            .filter(|&c| (0..self.k).all(|j| self.u(c, j) >= 0.5))
            .collect()
    }

    /// Maximizers of `u_jc` over `j`. When `c` ties with another arm it is
    /// dropped, so a self-duel is chosen only when `c` is the strict maximum.
    pub fn challenger_candidates(&self, c: usize) -> Vec<usize> {
        let best = (0..self.k).map(|j| self.u(j, c)).fold(f64::NEG_INFINITY, f64::max);
        let mut out: Vec<usize> = (0..self.k).filter(|&j| self.u(j, c) == best).collect();
        if out.len() > 1 {
            out.retain(|&j| j != c);
        }
        out
    }

    /// Champion then challenger, drawing uniformly where a choice exists.
    pub fn decide<R: Rng + ?Sized>(&self, rng: &mut R) -> StepDecision {
        let champion_pool = self.champion_pool();
        let pool_was_empty = champion_pool.is_empty();
        let c = if pool_was_empty {
            rng.gen_range(0..self.k)
        } else {
            pick(&champion_pool, rng)
        };
        let d = pick(&self.challenger_candidates(c), rng);
        StepDecision {
            c,
            d,
            champion_pool,
            pool_was_empty,
        }
    }
}

fn pick<R: Rng + ?Sized>(items: &[usize], rng: &mut R) -> usize {
    if items.len() == 1 {
        items[0]
    } else {
        items[rng.gen_range(0..items.len())]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepDecision {
    pub c: usize,
    pub d: usize,
    pub champion_pool: Vec<usize>,
    pub pool_was_empty: bool,
}

/// RUCB state for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RucbState {
    alpha: f64,
    wins: WinMatrix,
    t: u64,
}

impl RucbState {
    pub fn new(k: usize, alpha: f64) -> Result<Self, RucbError> {
        if k == 0 {
            return Err(RucbError::NoArms);
        }
        check_alpha(alpha)?;
        Ok(RucbState {
            alpha,
            wins: WinMatrix::new(k),
            t: 1,
        })
    }

    /// State with given win counts at iteration `t` (1-based).
    pub fn with_wins(wins: WinMatrix, alpha: f64, t: u64) -> Result<Self, RucbError> {
        if wins.k() == 0 {
            return Err(RucbError::NoArms);
        }
        check_alpha(alpha)?;
        Ok(RucbState { alpha, wins, t: t.max(1) })
    }

    pub fn k(&self) -> usize {
        self.wins.k()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Current 1-based iteration.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn wins(&self) -> &WinMatrix {
        &self.wins
    }

    pub fn optimistic_matrix(&self) -> OptimisticMatrix {
        OptimisticMatrix::from_wins(&self.wins, self.alpha, self.t)
    }

    pub fn select_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> StepDecision {
        self.optimistic_matrix().decide(rng)
    }

    pub fn update(&mut self, decision: &StepDecision, outcome: &DuelOutcome) -> Result<(), RucbError> {
        let same = (outcome.i, outcome.j) == (decision.c, decision.d)
            || (outcome.i, outcome.j) == (decision.d, decision.c);
        if !same {
            return Err(RucbError::PairMismatch {
                c: decision.c,
                d: decision.d,
                got_i: outcome.i,
                got_j: outcome.j,
            });
        }
        self.wins.record(outcome);
        self.t += 1;
        Ok(())
    }

    pub fn best_arm(&self) -> usize {
        self.wins.best_arm()
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), RucbError> {
    if alpha > 0.5 && alpha.is_finite() {
        Ok(())
    } else {
        Err(RucbError::AlphaTooSmall { alpha })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duel::stream_rng;
    use proptest::prelude::*;

    fn state_from(w: &[[u64; 2]; 2], t: u64, alpha: f64) -> RucbState {
        let mut wins = WinMatrix::new(2);
        wins.wins[1] = w[0][1];
        wins.wins[2] = w[1][0];
        RucbState::with_wins(wins, alpha, t).unwrap()
    }

    #[test]
    fn optimistic_matrix_hand_example() {
        let s = state_from(&[[0, 3], [1, 0]], 10, 0.51);
        let u = s.optimistic_matrix();
        // 0.75 + sqrt(0.51 * ln 10 / 4), 0.25 + the same bonus.
        assert!((u.u(0, 1) - 1.291830).abs() < 1e-6, "{}", u.u(0, 1));
        assert!((u.u(1, 0) - 0.791830).abs() < 1e-6, "{}", u.u(1, 0));
        assert_eq!(u.u(0, 0), 0.5);
        assert_eq!(u.u(1, 1), 0.5);
        assert_eq!(u.l(0, 1), 1.0 - u.u(1, 0));
        // Width 2·sqrt(α ln t / N).
        let width = u.u(0, 1) - u.l(0, 1);
        assert!((width - 2.0 * (0.51 * 10f64.ln() / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fresh_state_is_maximally_optimistic() {
        for t in [1, 2, 100] {
            let s = RucbState::with_wins(WinMatrix::new(4), 0.6, t).unwrap();
            let u = s.optimistic_matrix();
            for i in 0..4 {
                for j in 0..4 {
                    let expected = if i == j { 0.5 } else { 2.0 };
                    assert_eq!(u.u(i, j), expected);
                    if i == j {
                        assert_eq!(u.l(i, j), 0.5);
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_checked() {
        assert_eq!(RucbState::new(3, 0.5), Err(RucbError::AlphaTooSmall { alpha: 0.5 }));
        assert!(RucbState::new(3, 0.4).is_err());
        assert!(RucbState::new(3, f64::NAN).is_err());
        assert_eq!(RucbState::new(0, 1.0), Err(RucbError::NoArms));
    }

    #[test]
    fn select_pair_hand_example() {
        let s = state_from(&[[0, 3], [1, 0]], 10, 0.51);
        let mut rng = stream_rng(1, 1);
        for _ in 0..50 {
            let dec = s.select_pair(&mut rng);
            assert_eq!(dec.champion_pool, vec![0, 1]);
            assert!(!dec.pool_was_empty);
            if dec.c == 0 {
                assert_eq!(dec.d, 1);
            }
        }
    }

    #[test]
    fn fresh_state_never_self_duels() {
        let s = RucbState::new(5, 0.51).unwrap();
        let mut rng = stream_rng(4, 1);
        for _ in 0..200 {
            let dec = s.select_pair(&mut rng);
            assert_eq!(dec.champion_pool.len(), 5);
            assert_ne!(dec.c, dec.d);
        }
    }

    #[test]
    fn single_arm() {
        let s = RucbState::new(1, 0.51).unwrap();
        let mut rng = stream_rng(0, 1);
        let dec = s.select_pair(&mut rng);
        assert_eq!((dec.c, dec.d), (0, 0));
        assert_eq!(s.best_arm(), 0);
    }

    #[test]
    fn empty_pool_falls_back_to_uniform() {
        // Every arm has some u_cj < 1/2.
        let u = OptimisticMatrix::from_raw(3, vec![0.5, 0.4, 0.9, 0.9, 0.5, 0.4, 0.4, 0.9, 0.5]);
        assert!(u.champion_pool().is_empty());
        let mut rng = stream_rng(8, 1);
        let mut seen = [false; 3];
        for _ in 0..100 {
            let dec = u.decide(&mut rng);
            assert!(dec.pool_was_empty);
            seen[dec.c] = true;
        }
        assert_eq!(seen, [true; 3]);
    }

    #[test]
    fn challenger_prefers_other_arm_on_tie_with_champion() {
        // Column 0: u_00 = 0.5 (diagonal), u_10 = 0.5, u_20 = 0.3.
        let u = OptimisticMatrix::from_raw(3, vec![0.5, 0.5, 0.7, 0.5, 0.5, 0.6, 0.3, 0.4, 0.5]);
        assert_eq!(u.challenger_candidates(0), vec![1]);
        // Strict maximum at the champion itself: self-duel.
        let v = OptimisticMatrix::from_raw(2, vec![0.5, 0.8, 0.2, 0.5]);
        assert_eq!(v.challenger_candidates(0), vec![0]);
    }

    #[test]
    fn update_counts_and_mismatch() {
        let mut s = state_from(&[[0, 3], [1, 0]], 10, 0.51);
        let dec = StepDecision {
            c: 0,
            d: 1,
            champion_pool: vec![0, 1],
            pool_was_empty: false,
        };
        s.update(&dec, &DuelOutcome { i: 0, j: 1, winner: 0, t: 10 }).unwrap();
        assert_eq!(s.wins().wins(0, 1), 4);
        assert_eq!(s.t(), 11);

        let selfd = StepDecision {
            c: 1,
            d: 1,
            champion_pool: vec![1],
            pool_was_empty: false,
        };
        let before = s.wins().clone();
        s.update(&selfd, &DuelOutcome { i: 1, j: 1, winner: 1, t: 11 }).unwrap();
        assert_eq!(s.wins().informative_duels(), before.informative_duels());
        assert_eq!(s.wins().comparisons(1, 1), 1);
        assert_eq!(s.t(), 12);

        assert!(matches!(
            s.update(&dec, &DuelOutcome { i: 1, j: 1, winner: 1, t: 12 }),
            Err(RucbError::PairMismatch { .. })
        ));
    }

    #[test]
    fn best_arm_examples() {
        let s = state_from(&[[0, 3], [1, 0]], 10, 0.51);
        assert_eq!(s.best_arm(), 0);
        let fresh = RucbState::new(4, 1.0).unwrap();
        assert_eq!(fresh.best_arm(), 0);
        // Arm 1 wins its compared pair and the uncompared pair with arm 2 counts too.
        let mut w = WinMatrix::new(3);
        w.wins[1 * 3] = 5; // w_10
        w.wins[1] = 2; // w_01
        assert_eq!(w.best_arm(), 1);
    }

    #[test]
    fn update_loop_counts_informative_duels() {
        let m = crate::preference::generate_planted(4, 0.1, 0.3, 2).unwrap();
        let mut env = crate::duel::DuelEnv::new(m, 5);
        let mut s = RucbState::new(4, 0.51).unwrap();
        let mut rng = stream_rng(5, 1);
        let mut informative = 0;
        for _ in 0..100 {
            let dec = s.select_pair(&mut rng);
            let out = env.duel(dec.c, dec.d).unwrap();
            if dec.c != dec.d {
                informative += 1;
            }
            s.update(&dec, &out).unwrap();
        }
        assert_eq!(s.wins().informative_duels(), informative);
        assert_eq!(s.t(), 101);
        for i in 0..4 {
            assert_eq!(s.wins().wins(i, i), 0);
        }
    }

    proptest! {
        /// The decision depends on u only through order and the 1/2 threshold:
        /// shifting every off-diagonal entry by a positive constant keeps the
        /// challenger set whenever the champion was not already a maximizer.
        #[test]
        fn challenger_invariant_under_offdiagonal_shift(
            vals in proptest::collection::vec(0.0f64..2.0, 25),
            shift in 0.0f64..1.0,
            c in 0usize..5,
        ) {
            let k = 5;
            let u = OptimisticMatrix::from_raw(k, vals.clone());
            let shifted: Vec<f64> = vals.iter().map(|v| v + shift).collect();
            let v = OptimisticMatrix::from_raw(k, shifted);
            let before = u.challenger_candidates(c);
            if !before.contains(&c) {
                prop_assert_eq!(v.challenger_candidates(c), before);
            }
            // Pool only grows when every entry is raised.
            for a in u.champion_pool() {
                prop_assert!(v.champion_pool().contains(&a));
            }
        }

        #[test]
        fn confidence_width_matches_formula(
            w01 in 1u64..500, w10 in 0u64..500, t in 2u64..100_000, alpha in 0.51f64..4.0,
        ) {
            let mut wins = WinMatrix::new(2);
            wins.wins[1] = w01;
            wins.wins[2] = w10;
            let u = OptimisticMatrix::from_wins(&wins, alpha, t);
            let n = (w01 + w10) as f64;
            let width = u.u(0, 1) - u.l(0, 1);
            prop_assert!((width - 2.0 * (alpha * (t as f64).ln() / n).sqrt()).abs() < 1e-9);
        }
    }
}
