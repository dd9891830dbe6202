//! Exact tail oracles for Beta posteriors under a uniform prior, and
//! verifiers for the identities and envelopes that relate them to sums of
//! Bernoulli variables.
//!
//! Everything reduces to binomial pmfs. A Beta(s+1, n-s+1) posterior has
//! `P(θ > x) = P(Bin(n+1, x) <= s)`, so no incomplete-beta evaluation is
//! needed. Pmfs are built outward from the mode by ratio recurrences and
//! then normalized; tails are summed on whichever side is smaller so small
//! probabilities keep their relative precision.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// `|lhs - rhs|` allowed in the equality checks for `n <= 50`.
pub const EQUALITY_TOL_SMALL_N: f64 = 1e-12;
/// Same, for larger `n`.
pub const EQUALITY_TOL_LARGE_N: f64 = 1e-9;
/// Relative rounding slack on non-strict inequalities.
pub const INEQUALITY_REL_SLACK: f64 = 1e-12;
/// Strict decreases must exceed this fraction of the larger value.
pub const STRICT_REL_MARGIN: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PosteriorError {
    #[error("{what} = {value} is outside its domain")]
    DomainError { what: &'static str, value: f64 },
    #[error("success count {s} exceeds sample count {n}")]
    CountOutOfRange { s: u64, n: u64 },
    #[error("p = {p} must be below 1/2")]
    NotBelowHalf { p: f64 },
    #[error("{lemma} fails at n = {n}, p = {p}: {relation} with lhs = {lhs:e}, rhs = {rhs:e}")]
    VerificationFailure {
        lemma: &'static str,
        relation: &'static str,
        n: u64,
        p: f64,
        lhs: f64,
        rhs: f64,
    },
}

fn open_unit(what: &'static str, value: f64) -> Result<(), PosteriorError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(PosteriorError::DomainError { what, value })
    }
}

/// Binomial(n, p) pmf, `p ∈ (0, 1)`.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let len = n as usize + 1;
    let mut pmf = vec![0.0; len];
    let mode = (math::floor((n as f64 + 1.0) * p) as u64).min(n);
    let ln_q = math::ln_1p(-p);
    let ln_mode = math::ln_choose(n, mode) + mode as f64 * math::ln(p) + (n - mode) as f64 * ln_q;
    pmf[mode as usize] = math::exp(ln_mode);
    let odds = p / (1.0 - p);
    for m in mode..n {
        pmf[m as usize + 1] = pmf[m as usize] * ((n - m) as f64 / (m + 1) as f64) * odds;
    }
    for m in (1..=mode).rev() {
        pmf[m as usize - 1] = pmf[m as usize] * (m as f64 / (n - m + 1) as f64) / odds;
    }
    // Normalizing removes the common error of the mode term.
    let total: f64 = pmf.iter().sum();
    for v in &mut pmf {
        *v /= total;
    }
    pmf
}

/// `P(X >= k)` for a pmf on `0..len`, summed on the smaller side.
fn tail_at_least(pmf: &[f64], k: i64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    let k = k as usize;
    if k >= pmf.len() {
        return 0.0;
    }
    let upper: f64 = pmf[k..].iter().sum();
    let lower: f64 = pmf[..k].iter().sum();
    if upper <= lower {
        upper
    } else {
        1.0 - lower
    }
}

/// For every `s`, `P(X <= s)` computed with small-side summation.
fn cdf_table(pmf: &[f64]) -> Vec<f64> {
    let len = pmf.len();
    let mut low = vec![0.0; len];
    let mut acc = 0.0;
    for (s, v) in pmf.iter().enumerate() {
        acc += v;
        low[s] = acc;
    }
    let mut high = vec![0.0; len];
    let mut acc = 0.0;
    for s in (0..len).rev() {
        high[s] = acc;
        acc += pmf[s];
    }
    low.iter()
        .zip(&high)
        .map(|(&l, &h)| if l <= h { l } else { 1.0 - h })
        .collect()
}

/// `P(θ > threshold)` for `θ ~ Beta(s + 1, n - s + 1)`.
pub fn beta_tail(s: u64, n: u64, threshold: f64) -> Result<f64, PosteriorError> {
    if s > n {
        return Err(PosteriorError::CountOutOfRange { s, n });
    }
    open_unit("threshold", threshold)?;
    Ok(cdf_table(&binomial_pmf(n + 1, threshold))[s as usize])
}

/// `P(θ <= threshold)` for `θ ~ Beta(s + 1, n - s + 1)`.
pub fn beta_cdf(s: u64, n: u64, threshold: f64) -> Result<f64, PosteriorError> {
    if s > n {
        return Err(PosteriorError::CountOutOfRange { s, n });
    }
    open_unit("threshold", threshold)?;
    Ok(tail_at_least(&binomial_pmf(n + 1, threshold), s as i64 + 1))
}

/// `P(Π^n > threshold) = Σ_s Bin(n, p)(s) · P(θ > threshold | s, n)`.
pub fn marginalized_tail(n: u64, p: f64, threshold: f64) -> Result<f64, PosteriorError> {
    open_unit("p", p)?;
    open_unit("threshold", threshold)?;
    let weights = binomial_pmf(n, p);
    let beta_tails = cdf_table(&binomial_pmf(n + 1, threshold));
    Ok(weights.iter().zip(&beta_tails).map(|(w, b)| w * b).sum())
}

/// `P(Bin(n_x, p) + Bin(n_y, 1/2) >= k)` by exact convolution.
pub fn binomial_mix_tail(n_x: u64, p: f64, n_y: u64, k: i64) -> Result<f64, PosteriorError> {
    open_unit("p", p)?;
    if k <= 0 {
        return Ok(1.0);
    }
    if k as u64 > n_x + n_y {
        return Ok(0.0);
    }
    let px = binomial_pmf(n_x, p);
    let py = binomial_pmf(n_y, 0.5);
    let mut sum = vec![0.0; px.len() + py.len() - 1];
    for (a, &wa) in px.iter().enumerate() {
        for (b, &wb) in py.iter().enumerate() {
            sum[a + b] += wa * wb;
        }
    }
    Ok(tail_at_least(&sum, k))
}

/// Outcome of a lemma sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub lemma: &'static str,
    /// What `worst` measures.
    pub metric: &'static str,
    pub cases: u64,
    pub worst: f64,
    /// `(n, p)` at which `worst` was attained.
    pub witness: Option<(u64, f64)>,
}

impl LemmaReport {
    fn new(lemma: &'static str, metric: &'static str, start: f64) -> Self {
        LemmaReport {
            lemma,
            metric,
            cases: 0,
            worst: start,
            witness: None,
        }
    }
}

fn le_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQUALITY_REL_SLACK * rhs.abs()
}

pub const BETA_ESTIMATE: &str = "beta-estimate";
pub const TAIL_SHRINKAGE: &str = "tail-shrinkage";
pub const ENVELOPE: &str = "binomial-envelope";

/// For all `n <= n_max` and `p` in the grid:
/// `P(Π^n > 1/2) = P(Bin(n, p) + Bin(n + 1, 1/2) >= n + 1)` and
/// `P(Bin(n,p) + Bin(n,1/2) >= n+1) <= P(Π^n > 1/2) <= P(Bin(n+1,p) + Bin(n+1,1/2) >= n+1)`.
pub fn verify_beta_estimate(n_max: u64, p_grid: &[f64]) -> Result<LemmaReport, PosteriorError> {
    let fail = |relation, n, p, lhs, rhs| PosteriorError::VerificationFailure {
        lemma: BETA_ESTIMATE,
        relation,
        n,
        p,
        lhs,
        rhs,
    };
    let mut report = LemmaReport::new(BETA_ESTIMATE, "max |marginalized - mixture|", 0.0);
    for &p in p_grid {
        open_unit("p", p)?;
        for n in 0..=n_max {
            let k = n as i64 + 1;
            let marg = marginalized_tail(n, p, 0.5)?;
            let mix = binomial_mix_tail(n, p, n + 1, k)?;
            let dev = math::abs(marg - mix);
            let tol = if n <= 50 { EQUALITY_TOL_SMALL_N } else { EQUALITY_TOL_LARGE_N };
            if !(dev <= tol) {
                return Err(fail("marginalized == mixture", n, p, marg, mix));
            }
            if dev > report.worst || report.witness.is_none() {
                report.worst = dev;
                report.witness = Some((n, p));
            }
            let lower = binomial_mix_tail(n, p, n, k)?;
            let upper = binomial_mix_tail(n + 1, p, n + 1, k)?;
            if !le_with_slack(lower, marg) {
                return Err(fail("lower <= marginalized", n, p, lower, marg));
            }
            if !le_with_slack(marg, upper) {
                return Err(fail("marginalized <= upper", n, p, marg, upper));
            }
            report.cases += 1;
        }
    }
    Ok(report)
}

/// For every `p < 1/2` in the grid, `P(Π^n > 1/2)` strictly decreases over
/// `n = 0..=n_max`.
pub fn verify_tail_shrinkage(n_max: u64, p_grid_below_half: &[f64]) -> Result<LemmaReport, PosteriorError> {
    let mut report = LemmaReport::new(TAIL_SHRINKAGE, "min relative decrease", f64::INFINITY);
    for &p in p_grid_below_half {
        open_unit("p", p)?;
        if p >= 0.5 {
            return Err(PosteriorError::NotBelowHalf { p });
        }
        let mut prev = marginalized_tail(0, p, 0.5)?;
        for n in 1..=n_max {
            let cur = marginalized_tail(n, p, 0.5)?;
            let rel = (prev - cur) / prev;
            if !(prev - cur > STRICT_REL_MARGIN * prev) {
                return Err(PosteriorError::VerificationFailure {
                    lemma: TAIL_SHRINKAGE,
                    relation: "P(Π^(n-1) > 1/2) > P(Π^n > 1/2)",
                    n,
                    p,
                    lhs: prev,
                    rhs: cur,
                });
            }
            if rel < report.worst {
                report.worst = rel;
                report.witness = Some((n, p));
            }
            report.cases += 1;
            prev = cur;
        }
    }
    Ok(report)
}

/// For every `p < 1/2` in the grid and `1 <= n <= n_max`, with `Δ = 1/2 - p`
/// and `S_n = Bin(n, p) + Bin(n, 1/2)`:
///
/// ```text
/// (p/2)^n <= P(S_n >= n+1) < P(S_n >= n) <= exp(-n Δ² / 2)
/// (p/2)^n <= P(S_n >= n+1) <= P(Π^n > 1/2) <= P(S_{n+1} >= n+1) <= exp(-(n+1) Δ² / 2)
/// ```
///
/// The `(p/2)^n` side is compared in log space.
pub fn verify_envelope(n_max: u64, p_grid_below_half: &[f64]) -> Result<LemmaReport, PosteriorError> {
    let mut report = LemmaReport::new(ENVELOPE, "max lhs/rhs over the chain", 0.0);
    for &p in p_grid_below_half {
        open_unit("p", p)?;
        if p >= 0.5 {
            return Err(PosteriorError::NotBelowHalf { p });
        }
        let gap = 0.5 - p;
        for n in 1..=n_max {
            let fail = |relation, lhs, rhs| PosteriorError::VerificationFailure {
                lemma: ENVELOPE,
                relation,
                n,
                p,
                lhs,
                rhs,
            };
            let nf = n as f64;
            let ln_floor = nf * math::ln(p / 2.0);
            let a = binomial_mix_tail(n, p, n, n as i64 + 1)?;
            let b = binomial_mix_tail(n, p, n, n as i64)?;
            let marg = marginalized_tail(n, p, 0.5)?;
            let upper = binomial_mix_tail(n + 1, p, n + 1, n as i64 + 1)?;
            let cap_n = math::exp(-nf * gap * gap / 2.0);
            let cap_n1 = math::exp(-(nf + 1.0) * gap * gap / 2.0);

            // Log-space floor: a == 0 only on underflow, which the floor must then also hit.
            let floor_ok = if a > 0.0 {
                ln_floor <= math::ln(a) + INEQUALITY_REL_SLACK
            } else {
                ln_floor < math::ln(f64::MIN_POSITIVE)
            };
            if !floor_ok {
                return Err(fail("(p/2)^n <= P(S_n >= n+1)", math::exp(ln_floor), a));
            }
            if !(b - a > STRICT_REL_MARGIN * b) {
                return Err(fail("P(S_n >= n+1) < P(S_n >= n)", a, b));
            }
            let chain = [
                ("P(S_n >= n) <= exp(-n Δ²/2)", b, cap_n),
                ("P(S_n >= n+1) <= P(Π^n > 1/2)", a, marg),
                ("P(Π^n > 1/2) <= P(S_(n+1) >= n+1)", marg, upper),
                ("P(S_(n+1) >= n+1) <= exp(-(n+1) Δ²/2)", upper, cap_n1),
            ];
            for (relation, lhs, rhs) in chain {
                if !le_with_slack(lhs, rhs) {
                    return Err(fail(relation, lhs, rhs));
                }
                let ratio = lhs / rhs;
                if ratio > report.worst {
                    report.worst = ratio;
                    report.witness = Some((n, p));
                }
            }
            report.cases += 1;
        }
    }
    Ok(report)
}

/// `{step, 2·step, …} ∩ (0, limit)` as exact multiples, e.g. `0.05..=0.95`.
pub fn probability_grid(step_count: u32, below: u32) -> Vec<f64> {
    (1..below).map(|i| i as f64 / step_count as f64).collect()
}
