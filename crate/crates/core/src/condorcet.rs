//! How often do random K-subsets of a larger pool keep a Condorcet winner,
//! or a total order?

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::preference::total_order_of;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubsetError {
    #[error("subset size {size} exceeds arm count {k}")]
    SubsetTooLarge { size: usize, k: usize },
    #[error("subset size must be at least 1")]
    EmptySubset,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("relation is not a strict majority relation at ({i}, {j})")]
    NotStrict { i: usize, j: usize },
    #[error("binomial count overflows 128 bits")]
    Overflow,
}

/// Boolean K×K relation, `beats(i, j)` meaning arm i wins the pair by strict
/// majority.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeatRelation {
    k: usize,
    cells: Vec<bool>,
}

impl BeatRelation {
    pub fn from_fn(k: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut cells = vec![false; k * k];
        for i in 0..k {
            for j in 0..k {
                cells[i * k + j] = i != j && f(i, j);
            }
        }
        BeatRelation { k, cells }
    }

    /// Checks irreflexivity and asymmetry.
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Self, SubsetError> {
        let k = rows.len();
        let rel = BeatRelation::from_fn(k, |i, j| rows[i].as_ref()[j]);
        for i in 0..k {
            if rows[i].as_ref()[i] {
                return Err(SubsetError::NotStrict { i, j: i });
            }
        }
        rel.check_strict()?;
        Ok(rel)
    }

    fn check_strict(&self) -> Result<(), SubsetError> {
        for i in 0..self.k {
            for j in (i + 1)..self.k {
                if self.beats(i, j) && self.beats(j, i) {
                    return Err(SubsetError::NotStrict { i, j });
                }
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn beats(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.k + j]
    }

    /// `N_r`: number of arms that arm `r` beats.
    pub fn wins(&self, r: usize) -> usize {
        (0..self.k).filter(|&j| self.beats(r, j)).count()
    }

    /// Condorcet winner of the sub-relation induced by `arms`.
    pub fn subset_winner(&self, arms: &[usize]) -> Option<usize> {
        arms.iter()
            .copied()
            .find(|&i| arms.iter().all(|&j| j == i || self.beats(i, j)))
    }

    pub fn subset_total_order(&self, arms: &[usize]) -> Option<Vec<usize>> {
        total_order_of(arms, |i, j| self.beats(i, j))
    }
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial_u128(n: u64, m: u64) -> Option<u128> {
    if m > n {
        return Some(0);
    }
    let m = m.min(n - m);
    let mut c: u128 = 1;
    for i in 0..m {
        // c = C(n, i) here, and C(n, i) * (n - i) is divisible by i + 1.
        c = c.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(c)
}

/// Exact counts behind [`condorcet_subset_probability`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetCount {
    /// Subsets of the given size that have a Condorcet winner.
    pub with_winner: u128,
    /// All subsets of the given size.
    pub total: u128,
}

impl SubsetCount {
    pub fn probability(&self) -> f64 {
        self.with_winner as f64 / self.total as f64
    }
}

/// Counts size-`m` subsets containing a Condorcet winner as
/// `Σ_r C(N_r, m - 1)`: arm r wins exactly the subsets made of r plus
/// `m - 1` arms it beats, and a strict relation has at most one winner per
/// subset.
pub fn condorcet_subset_count(beats: &BeatRelation, subset_size: usize) -> Result<SubsetCount, SubsetError> {
    let k = beats.k();
    if subset_size == 0 {
        return Err(SubsetError::EmptySubset);
    }
    if subset_size > k {
        return Err(SubsetError::SubsetTooLarge { size: subset_size, k });
    }
    beats.check_strict()?;
    let mut with_winner: u128 = 0;
    for r in 0..k {
        let c = binomial_u128(beats.wins(r) as u64, subset_size as u64 - 1).ok_or(SubsetError::Overflow)?;
        with_winner = with_winner.checked_add(c).ok_or(SubsetError::Overflow)?;
    }
    let total = binomial_u128(k as u64, subset_size as u64).ok_or(SubsetError::Overflow)?;
    Ok(SubsetCount { with_winner, total })
}

pub fn condorcet_subset_probability(beats: &BeatRelation, subset_size: usize) -> Result<f64, SubsetError> {
    condorcet_subset_count(beats, subset_size).map(|c| c.probability())
}

/// Monte Carlo estimate of the probability that a uniformly drawn subset of
/// the given size admits a total order. Deterministic in `seed`.
pub fn total_ordering_probability_mc(
    beats: &BeatRelation,
    subset_size: usize,
    samples: u64,
    seed: u64,
) -> Result<f64, SubsetError> {
    let k = beats.k();
    if subset_size == 0 {
        return Err(SubsetError::EmptySubset);
    }
    if subset_size > k {
        return Err(SubsetError::SubsetTooLarge { size: subset_size, k });
    }
    if samples == 0 {
        return Err(SubsetError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..k).collect();
    let mut hits = 0u64;
    for _ in 0..samples {
        // Partial Fisher-Yates: the first `subset_size` slots are a uniform subset.
        for slot in 0..subset_size {
            let pick = rng.gen_range(slot..k);
            pool.swap(slot, pick);
        }
        if beats.subset_total_order(&pool[..subset_size]).is_some() {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}
