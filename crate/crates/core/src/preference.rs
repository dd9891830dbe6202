//! Preference matrices and the structural questions asked of them.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::condorcet::BeatRelation;
use crate::math;

/// Ingestion tolerance for `p_ij + p_ji = 1` and `p_ii = 1/2`.
pub const INGEST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix is empty")]
    Empty,
    #[error("row {row} has {len} entries, expected {k}")]
    NonSquare { row: usize, len: usize, k: usize },
    #[error("entry ({i}, {j}) = {value} is not a probability")]
    EntryOutOfRange { i: usize, j: usize, value: f64 },
    #[error("p[{i}][{j}] + p[{j}][{i}] = {sum}, expected 1")]
    SkewViolation { i: usize, j: usize, sum: f64 },
    #[error("diagonal entry ({i}, {i}) = {value}, expected 0.5")]
    DiagonalViolation { i: usize, value: f64 },
    #[error("matrix has no Condorcet winner")]
    NoCondorcetWinner,
    #[error("gap range [{min}, {max}] must satisfy 0 < min <= max < 1/2")]
    InvalidGapRange { min: f64, max: f64 },
    #[error("arm count must be at least 1")]
    NoArms,
}

/// A validated K×K preference matrix. `p(i, j)` is the probability that arm
/// `i` wins a duel against arm `j`.
///
/// Stored normalized: the lower triangle is rebuilt from the upper one, so
/// `p(i, j) + p(j, i) == 1.0` and `p(i, i) == 0.5` hold exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    k: usize,
    p: Vec<f64>,
}

impl PreferenceMatrix {
    /// Validates a raw row-major array and returns the normalized matrix.
    pub fn validate<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let k = rows.len();
        if k == 0 {
            return Err(MatrixError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            let len = r.as_ref().len();
            if len != k {
                return Err(MatrixError::NonSquare { row, len, k });
            }
        }
        let at = |i: usize, j: usize| rows[i].as_ref()[j];
        for i in 0..k {
            for j in 0..k {
                let value = at(i, j);
                if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                    return Err(MatrixError::EntryOutOfRange { i, j, value });
                }
            }
        }
        for i in 0..k {
            let value = at(i, i);
            if math::abs(value - 0.5) > INGEST_TOLERANCE {
                return Err(MatrixError::DiagonalViolation { i, value });
            }
            for j in (i + 1)..k {
                let sum = at(i, j) + at(j, i);
                if math::abs(sum - 1.0) > INGEST_TOLERANCE {
                    return Err(MatrixError::SkewViolation { i, j, sum });
                }
            }
        }
        Ok(Self::from_upper(k, at))
    }

    /// Builds a matrix from an upper-triangle closure (`i < j`).
    fn from_upper(k: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Self {
        let mut p = vec![0.5; k * k];
        for i in 0..k {
            for j in (i + 1)..k {
                let v = upper(i, j);
                p[i * k + j] = v;
                p[j * k + i] = 1.0 - v;
            }
        }
        PreferenceMatrix { k, p }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.p.chunks(self.k)
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// The strict majority relation `p_ij > 1/2`.
    pub fn beats(&self) -> BeatRelation {
        BeatRelation::from_fn(self.k, |i, j| self.p(i, j) > 0.5)
    }

    /// The unique arm that beats every other arm with probability strictly
    /// above one half, if any.
    pub fn condorcet_winner(&self) -> Option<usize> {
        (0..self.k).find(|&i| (0..self.k).all(|j| j == i || self.p(i, j) > 0.5))
    }

    /// Arm with the largest row sum; ties go to the lowest index.
    pub fn borda_winner(&self) -> usize {
        let mut best = 0;
        let mut best_sum = f64::NEG_INFINITY;
        for (i, row) in self.rows().enumerate() {
            let sum: f64 = row.iter().sum();
            if sum > best_sum {
                best = i;
                best_sum = sum;
            }
        }
        best
    }

    pub fn gaps(&self) -> Result<GapVector, MatrixError> {
        let winner = self.condorcet_winner().ok_or(MatrixError::NoCondorcetWinner)?;
        let delta: Vec<f64> = (0..self.k).map(|i| self.p(winner, i) - 0.5).collect();
        let delta_star = delta.iter().copied().fold(0.0, f64::max);
        Ok(GapVector {
            winner,
            delta,
            delta_star,
        })
    }

    pub fn analyze_assumptions(&self) -> AssumptionReport {
        let order = total_order(self.k, |i, j| self.p(i, j) > 0.5);
        let (gamma, strong) = match &order {
            Some(order) => (
                Some(self.relaxed_transitivity_gamma(order)),
                self.strongly_transitive(order),
            ),
            None => (None, false),
        };
        AssumptionReport {
            condorcet_winner: self.condorcet_winner(),
            borda_winner: self.borda_winner(),
            total_ordering_holds: order.is_some(),
            total_order: order,
            gamma,
            strong_transitivity_holds: strong,
        }
    }

    /// Smallest `γ >= 1` with `γ·p_{1k} >= max{p_{1j}, p_{jk}}` for all
    /// `1 < j < k` in the given order.
    fn relaxed_transitivity_gamma(&self, order: &[usize]) -> f64 {
        let mut gamma: f64 = 1.0;
        let Some(&top) = order.first() else {
            return gamma;
        };
        for (a, &j) in order.iter().enumerate().skip(1) {
            for &k in &order[a + 1..] {
                let need = self.p(top, j).max(self.p(j, k));
                gamma = gamma.max(need / self.p(top, k));
            }
        }
        gamma
    }

    fn strongly_transitive(&self, order: &[usize]) -> bool {
        let n = order.len();
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    let (i, j, k) = (order[a], order[b], order[c]);
                    if self.p(i, k) < self.p(i, j).max(self.p(j, k)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Sorts `arms` by number of strict wins (descending, stable on index) and
/// returns the order if it linearizes the relation. For a tournament this is
/// exact: it is linearizable iff transitive, and then the wins order is the
/// only witness.
pub(crate) fn total_order_of(arms: &[usize], beats: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let mut scored: Vec<(usize, usize)> = arms
        .iter()
        .map(|&i| (arms.iter().filter(|&&j| j != i && beats(i, j)).count(), i))
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = scored.into_iter().map(|(_, i)| i).collect();
    for a in 0..order.len() {
        for b in (a + 1)..order.len() {
            if !beats(order[a], order[b]) {
                return None;
            }
        }
    }
    Some(order)
}

fn total_order(k: usize, beats: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let arms: Vec<usize> = (0..k).collect();
    total_order_of(&arms, beats)
}

/// Gaps of every arm relative to the Condorcet winner.
#[derive(Debug, Clone, PartialEq)]
pub struct GapVector {
    pub winner: usize,
    /// `delta[i] = p(winner, i) - 1/2`; zero at the winner.
    pub delta: Vec<f64>,
    /// Largest gap.
    pub delta_star: f64,
}

impl GapVector {
    pub fn k(&self) -> usize {
        self.delta.len()
    }

    /// `(Δ_i + Δ_j) / 2`.
    #[inline]
    pub fn pair_gap(&self, i: usize, j: usize) -> f64 {
        (self.delta[i] + self.delta[j]) / 2.0
    }

    /// Smallest gap over the non-winner arms, `None` when K = 1.
    pub fn delta_min(&self) -> Option<f64> {
        self.delta
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.winner)
            .map(|(_, &d)| d)
            .reduce(f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub condorcet_winner: Option<usize>,
    pub borda_winner: usize,
    pub total_ordering_holds: bool,
    /// The linearizing order, best arm first, when one exists.
    pub total_order: Option<Vec<usize>>,
    /// Minimal relaxed stochastic transitivity constant (present iff a total
    /// order exists).
    pub gamma: Option<f64>,
    pub strong_transitivity_holds: bool,
}

/// Planted-winner instance: arm 0 beats arm j with probability drawn
/// uniformly from `[1/2 + delta_min, 1/2 + delta_max]`; the other upper
/// entries are uniform on `[0, 1)`.
pub fn generate_planted(
    k: usize,
    delta_min: f64,
    delta_max: f64,
    seed: u64,
) -> Result<PreferenceMatrix, MatrixError> {
    if k == 0 {
        return Err(MatrixError::NoArms);
    }
    if !(delta_min > 0.0 && delta_min <= delta_max && delta_max < 0.5) {
        return Err(MatrixError::InvalidGapRange {
            min: delta_min,
            max: delta_max,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = delta_max - delta_min;
    Ok(PreferenceMatrix::from_upper(k, |i, _| {
        let u: f64 = rng.gen();
        if i == 0 {
            0.5 + (delta_min + width * u)
        } else {
            u
        }
    }))
}

/// Cyclic instance: arm i beats the next `(k-1)/2` arms around the circle
/// with probability 0.6. Opposite arms on an even circle tie at 1/2.
pub fn generate_cycle(k: usize) -> Result<PreferenceMatrix, MatrixError> {
    if k == 0 {
        return Err(MatrixError::NoArms);
    }
    let reach = (k - 1) / 2;
    Ok(PreferenceMatrix::from_upper(k, |i, j| {
        let forward = j - i;
        if forward <= reach {
            0.6
        } else if k - forward <= reach {
            0.4
        } else {
            0.5
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example3() -> PreferenceMatrix {
        PreferenceMatrix::validate(&[[0.5, 0.7, 0.6], [0.3, 0.5, 0.8], [0.4, 0.2, 0.5]]).unwrap()
    }

    #[test]
    fn validate_accepts_and_rejects() {
        let m = PreferenceMatrix::validate(&[[0.5, 0.7], [0.3, 0.5]]).unwrap();
        assert_eq!(m.k(), 2);
        assert!(matches!(
            PreferenceMatrix::validate(&[[0.5, 0.7], [0.4, 0.5]]),
            Err(MatrixError::SkewViolation { i: 0, j: 1, .. })
        ));
        assert!(matches!(
            PreferenceMatrix::validate(&[[0.6]]),
            Err(MatrixError::DiagonalViolation { i: 0, .. })
        ));
        assert!(matches!(
            PreferenceMatrix::validate(&[vec![0.5, 0.5], vec![0.5]]),
            Err(MatrixError::NonSquare { row: 1, .. })
        ));
        assert!(matches!(
            PreferenceMatrix::validate(&[[0.5, 1.2], [-0.2, 0.5]]),
            Err(MatrixError::EntryOutOfRange { .. })
        ));
        assert!(matches!(
            PreferenceMatrix::validate(&[[0.5, f64::NAN], [0.5, 0.5]]),
            Err(MatrixError::EntryOutOfRange { .. })
        ));
        let empty: [[f64; 0]; 0] = [];
        assert_eq!(PreferenceMatrix::validate(&empty), Err(MatrixError::Empty));
    }

    #[test]
    fn validate_renormalizes_within_tolerance() {
        let m = PreferenceMatrix::validate(&[[0.5, 0.7], [0.3 + 5e-10, 0.5 - 5e-10]]).unwrap();
        assert_eq!(m.p(1, 0), 1.0 - 0.7);
        assert_eq!(m.p(1, 1), 0.5);
    }

    #[test]
    fn winners() {
        let m = example3();
        assert_eq!(m.condorcet_winner(), Some(0));
        assert_eq!(m.borda_winner(), 0);

        let cyc = generate_cycle(3).unwrap();
        assert_eq!(cyc.p(0, 1), 0.6);
        assert_eq!(cyc.p(1, 2), 0.6);
        assert_eq!(cyc.p(2, 0), 0.6);
        assert_eq!(cyc.condorcet_winner(), None);
        assert_eq!(cyc.borda_winner(), 0);

        let one = PreferenceMatrix::validate(&[[0.5]]).unwrap();
        assert_eq!(one.condorcet_winner(), Some(0));
        assert_eq!(one.borda_winner(), 0);
    }

    #[test]
    fn tie_with_winner_means_no_condorcet_winner() {
        let m = PreferenceMatrix::validate(&[[0.5, 0.5, 0.7], [0.5, 0.5, 0.6], [0.3, 0.4, 0.5]]).unwrap();
        assert_eq!(m.condorcet_winner(), None);
    }

    #[test]
    fn gap_examples() {
        let m = PreferenceMatrix::validate(&[[0.5, 0.8, 0.7], [0.2, 0.5, 0.5], [0.3, 0.5, 0.5]]).unwrap();
        let g = m.gaps().unwrap();
        assert_eq!(g.winner, 0);
        assert_eq!(g.delta[0], 0.0);
        assert!((g.delta[1] - 0.3).abs() < 1e-15);
        assert!((g.delta[2] - 0.2).abs() < 1e-15);
        assert!((g.delta_star - 0.3).abs() < 1e-15);

        let one = PreferenceMatrix::validate(&[[0.5]]).unwrap().gaps().unwrap();
        assert_eq!(one.delta, vec![0.0]);
        assert_eq!(one.delta_star, 0.0);

        let close = PreferenceMatrix::validate(&[[0.5, 0.51], [0.49, 0.5]]).unwrap().gaps().unwrap();
        assert!((close.delta[1] - 0.01).abs() < 1e-15);

        assert_eq!(generate_cycle(3).unwrap().gaps(), Err(MatrixError::NoCondorcetWinner));
    }

    #[test]
    fn assumption_report_on_examples() {
        let r = example3().analyze_assumptions();
        assert!(r.total_ordering_holds);
        assert_eq!(r.total_order, Some(vec![0, 1, 2]));
        assert!(!r.strong_transitivity_holds);
        assert!((r.gamma.unwrap() - 4.0 / 3.0).abs() < 1e-12);

        let c = generate_cycle(3).unwrap().analyze_assumptions();
        assert!(!c.total_ordering_holds);
        assert_eq!(c.gamma, None);
        assert_eq!(c.condorcet_winner, None);
    }

    #[test]
    fn strong_transitivity_on_linear_model() {
        // p_ij = 1/2 + (s_i - s_j) with decreasing strengths is strongly transitive.
        let s = [0.3, 0.2, 0.1, 0.0];
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| 0.5 + (s[i] - s[j])).collect())
            .collect();
        let r = PreferenceMatrix::validate(&rows).unwrap().analyze_assumptions();
        assert!(r.total_ordering_holds);
        assert!(r.strong_transitivity_holds);
        assert_eq!(r.gamma, Some(1.0));
    }

    #[test]
    fn planted_degenerate_range_is_exact() {
        let m = generate_planted(2, 0.1, 0.1, 7).unwrap();
        assert_eq!(m.p(0, 1), 0.6);
        assert!(matches!(
            generate_planted(3, 0.3, 0.1, 0),
            Err(MatrixError::InvalidGapRange { .. })
        ));
        assert!(matches!(
            generate_planted(3, 0.0, 0.1, 0),
            Err(MatrixError::InvalidGapRange { .. })
        ));
        assert!(matches!(
            generate_planted(3, 0.1, 0.5, 0),
            Err(MatrixError::InvalidGapRange { .. })
        ));
    }

    #[test]
    fn planted_always_has_winner_zero() {
        for seed in 0..100 {
            let m = generate_planted(16, 0.05, 0.3, seed).unwrap();
            assert_eq!(m.condorcet_winner(), Some(0), "seed {seed}");
        }
    }

    fn gamma_is_minimal(m: &PreferenceMatrix, order: &[usize], gamma: f64) {
        let top = order[0];
        let holds = |g: f64| {
            order.iter().enumerate().skip(1).all(|(a, &j)| {
                order[a + 1..]
                    .iter()
                    .all(|&k| g * m.p(top, k) * (1.0 + 4.0 * f64::EPSILON) >= m.p(top, j).max(m.p(j, k)))
            })
        };
        assert!(holds(gamma));
        if gamma > 1.0 {
            assert!(!holds(gamma - 1e-9));
        }
    }

    fn arb_matrix(max_k: usize) -> impl Strategy<Value = PreferenceMatrix> {
        (1..=max_k).prop_flat_map(|k| {
            proptest::collection::vec(0.0f64..=1.0, k * k).prop_map(move |v| {
                PreferenceMatrix::from_upper(k, |i, j| v[i * k + j])
            })
        })
    }

    /// Random linear-order matrices: the arms ranked by a permutation, upper
    /// probabilities drawn above 1/2.
    fn arb_ordered_matrix(max_k: usize) -> impl Strategy<Value = PreferenceMatrix> {
        (3..=max_k).prop_flat_map(|k| {
            (
                proptest::collection::vec(0.5001f64..1.0, k * k),
                Just((0..k).collect::<Vec<usize>>()).prop_shuffle(),
            )
                .prop_map(move |(v, perm)| {
                    let mut rank = vec![0; k];
                    for (pos, &arm) in perm.iter().enumerate() {
                        rank[arm] = pos;
                    }
                    PreferenceMatrix::from_upper(k, |i, j| {
                        let x = v[i * k + j];
                        if rank[i] < rank[j] {
                            x
                        } else {
                            1.0 - x
                        }
                    })
                })
        })
    }

    proptest! {
        #[test]
        fn normalized_matrix_is_exactly_skew(m in arb_matrix(8)) {
            let k = m.k();
            for i in 0..k {
                prop_assert_eq!(m.p(i, i), 0.5);
                for j in 0..k {
                    prop_assert_eq!(m.p(i, j) + m.p(j, i), 1.0);
                }
            }
            let again = PreferenceMatrix::validate(&m.rows().collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(again, m);
        }

        #[test]
        fn total_order_implies_winner_on_top(m in arb_matrix(7)) {
            let r = m.analyze_assumptions();
            if r.total_ordering_holds {
                prop_assert_eq!(r.condorcet_winner, Some(r.total_order.as_ref().unwrap()[0]));
            }
            if let Some(w) = r.condorcet_winner {
                let g = m.gaps().unwrap();
                prop_assert_eq!(g.winner, w);
                for i in 0..m.k() {
                    if i != w { prop_assert!(g.delta[i] > 0.0); }
                }
            }
        }

        #[test]
        fn gamma_is_tight(m in arb_ordered_matrix(7)) {
            let r = m.analyze_assumptions();
            prop_assert!(r.total_ordering_holds);
            let order = r.total_order.unwrap();
            gamma_is_minimal(&m, &order, r.gamma.unwrap());
        }
    }
}
