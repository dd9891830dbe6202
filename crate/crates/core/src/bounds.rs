//! Closed-form regret and comparison-count bounds for RUCB, plus the
//! Bernoulli KL divergence used to compare against KL-based indices.
//!
//! With `α > 1/2`, `δ ∈ (0, 1]` and K arms:
//!
//! ```text
//! C(δ)   = ((4α - 1) K² / ((2α - 1) δ))^(1 / (2α - 1))
//! D_ij   = 4α / min{Δ_i², Δ_j²}            (D_ii = 0)
//! R_t   <= C(δ) Δ* + Σ_{i>j} D_ij Δ_ij ln t          w.p. 1 - δ
//! E[R_t] <= Δ* ((4α - 1) K² / (2α - 1))^(1/(2α-1)) (2α - 1)/(2α - 2)
//!           + Σ_{i>j} 2α (Δ_i + Δ_j) / min{Δ_i², Δ_j²} ln t     (α > 1)
//! ```
//!
//! The winner's own gap is zero, so for pairs that include the winner the
//! minimum is taken over the strictly positive gap only.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;
use crate::preference::GapVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("alpha = {alpha} must exceed 1/2")]
    AlphaTooSmall { alpha: f64 },
    #[error("alpha = {alpha} must exceed 1 for the expected regret bound")]
    AlphaNotGreaterThanOne { alpha: f64 },
    #[error("delta = {delta} must lie in (0, 1]")]
    InvalidDelta { delta: f64 },
    #[error("arm {arm} is not the winner but has zero gap")]
    ZeroGap { arm: usize },
    #[error("matrix has no Condorcet winner")]
    NoCondorcetWinner,
    #[error("time must be at least 1")]
    ZeroTime,
    #[error("kl({a}, {b}) requires both arguments in (0, 1)")]
    DomainError { a: f64, b: f64 },
}

/// Parameters shared by every bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    alpha: f64,
    k: usize,
    delta: f64,
    gaps: GapVector,
}

impl BoundParams {
    pub fn new(alpha: f64, delta: f64, gaps: GapVector) -> Result<Self, BoundError> {
        if !(alpha > 0.5 && alpha.is_finite()) {
            return Err(BoundError::AlphaTooSmall { alpha });
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(BoundError::InvalidDelta { delta });
        }
        let k = gaps.k();
        for (arm, &d) in gaps.delta.iter().enumerate() {
            if arm != gaps.winner && d <= 0.0 {
                return Err(BoundError::ZeroGap { arm });
            }
        }
        Ok(BoundParams { alpha, k, delta, gaps })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gaps(&self) -> &GapVector {
        &self.gaps
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self, BoundError> {
        BoundParams::new(self.alpha, delta, self.gaps.clone())
    }
}

/// `ln C(δ)`, finite for any valid parameters.
pub fn ln_c_delta(p: &BoundParams) -> f64 {
    ln_c_of(p.alpha, p.k, p.delta)
}

fn ln_c_of(alpha: f64, k: usize, delta: f64) -> f64 {
    let e = 2.0 * alpha - 1.0;
    (math::ln(4.0 * alpha - 1.0) + 2.0 * math::ln(k as f64) - math::ln(e) - math::ln(delta)) / e
}

/// `C(δ)`, evaluated in log space. At α near 1/2 the exponent `1/(2α-1)` is
/// large and the value can exceed `f64::MAX`, in which case this is `+inf`;
/// [`ln_c_delta`] stays finite.
pub fn c_delta(p: &BoundParams) -> f64 {
    math::exp(ln_c_delta(p))
}

/// `C(δ)` for raw parameters, checking only α and δ.
pub fn c_delta_raw(alpha: f64, k: usize, delta: f64) -> Result<f64, BoundError> {
    if !(alpha > 0.5 && alpha.is_finite()) {
        return Err(BoundError::AlphaTooSmall { alpha });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(BoundError::InvalidDelta { delta });
    }
    Ok(math::exp(ln_c_of(alpha, k, delta)))
}

/// `min{Δ_i², Δ_j²}` over the strictly positive gaps of the pair.
fn pair_min_sq(g: &GapVector, i: usize, j: usize) -> f64 {
    let (a, b) = (g.delta[i], g.delta[j]);
    let m = match (i == g.winner, j == g.winner) {
        (true, _) => b,
        (_, true) => a,
        _ => a.min(b),
    };
    m * m
}

/// Row-major `D` matrix.
pub fn d_matrix(p: &BoundParams) -> Vec<f64> {
    let k = p.k;
    let mut d = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                d[i * k + j] = 4.0 * p.alpha / pair_min_sq(&p.gaps, i, j);
            }
        }
    }
    d
}

/// `Σ_{i>j} D_ij Δ_ij`, the coefficient of `ln t` in the regret bounds.
pub fn log_coefficient(p: &BoundParams) -> f64 {
    let g = &p.gaps;
    let mut sum = 0.0;
    for i in 0..p.k {
        for j in 0..i {
            sum += 4.0 * p.alpha / pair_min_sq(g, i, j) * g.pair_gap(i, j);
        }
    }
    sum
}

/// `max{C(δ), D_ij ln t}`: the high-probability cap on `N_ij(t)`.
pub fn count_bound(p: &BoundParams, d: &[f64], i: usize, j: usize, t: u64) -> f64 {
    c_delta(p).max(d[i * p.k + j] * math::ln(t as f64))
}

pub fn high_prob_regret_curve(p: &BoundParams, t: u64) -> Result<f64, BoundError> {
    if t == 0 {
        return Err(BoundError::ZeroTime);
    }
    Ok(c_delta(p) * p.gaps.delta_star + log_coefficient(p) * math::ln(t as f64))
}

/// `∫_0^1 C(1 - q) dq` in closed form (α > 1).
pub fn expected_constant(p: &BoundParams) -> Result<f64, BoundError> {
    if !(p.alpha > 1.0) {
        return Err(BoundError::AlphaNotGreaterThanOne { alpha: p.alpha });
    }
    let e = 2.0 * p.alpha - 1.0;
    let ln_l = (math::ln(4.0 * p.alpha - 1.0) + 2.0 * math::ln(p.k as f64) - math::ln(e)) / e;
    Ok(math::exp(ln_l) * e / (2.0 * p.alpha - 2.0))
}

pub fn expected_regret_bound(p: &BoundParams, t: u64) -> Result<f64, BoundError> {
    if t == 0 {
        return Err(BoundError::ZeroTime);
    }
    let constant = expected_constant(p)?;
    let g = &p.gaps;
    let mut slope = 0.0;
    for i in 0..p.k {
        for j in 0..i {
            slope += 2.0 * p.alpha * (g.delta[i] + g.delta[j]) / pair_min_sq(g, i, j);
        }
    }
    Ok(g.delta_star * constant + slope * math::ln(t as f64))
}

/// Bernoulli KL divergence `kl(a, b)`.
pub fn kl_bernoulli(a: f64, b: f64) -> Result<f64, BoundError> {
    let open = |x: f64| x > 0.0 && x < 1.0;
    if !open(a) || !open(b) {
        return Err(BoundError::DomainError { a, b });
    }
    Ok(a * math::ln(a / b) + (1.0 - a) * math::ln((1.0 - a) / (1.0 - b)))
}

/// Checks `2Δ_i² <= kl(1/2 + Δ_i, 1/2) <= 4Δ_i²` for every non-winner arm.
pub fn kl_sandwich_check(gaps: &GapVector) -> Result<bool, BoundError> {
    for (i, &d) in gaps.delta.iter().enumerate() {
        if i == gaps.winner {
            continue;
        }
        let kl = kl_bernoulli(0.5 + d, 0.5)?;
        if !(2.0 * d * d <= kl && kl <= 4.0 * d * d) {
            return Ok(false);
        }
    }
    Ok(true)
}
