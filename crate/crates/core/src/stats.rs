//! Summary statistics for repeated runs and the Wilcoxon rank-sum
//! (Mann-Whitney U) test.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

/// Largest per-sample size for which the exact null distribution is used.
pub const EXACT_MAX_SIZE: usize = 12;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("statistics of an empty sample are undefined")]
    Empty,
    #[error("non-finite value in sample")]
    NonFinite,
}

/// Mean, sample standard deviation, minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub worst: f64,
    pub best: f64,
}

pub fn summary_stats(values: &[f64]) -> Result<Summary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = values.len() as f64;
    let worst = values.iter().copied().fold(f64::INFINITY, f64::min);
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // keep worst <= mean <= best despite rounding in the mean
    let mean = (values.iter().sum::<f64>() / n).clamp(worst, best);
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(Summary { mean, std, worst, best })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    /// U statistic of the first sample.
    pub statistic: f64,
    /// U statistic of the second sample; `statistic + u_other = |a|·|b|`.
    pub u_other: f64,
    pub p_value: f64,
    pub method: TestMethod,
    pub significant_at_005: bool,
}

/// Midranks (1-based) of the concatenation of `a` and `b`, plus the tie
/// group sizes.
fn midranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&x, &y| pooled[x].total_cmp(&pooled[y]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && pooled[idx[end]] == pooled[idx[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// Two-sided rank-sum test of `a` against `b`.
///
/// The exact null distribution is enumerated when both samples have at most
/// [`EXACT_MAX_SIZE`] values and there are no ties; otherwise the normal
/// approximation with tie and continuity corrections is used.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<TestOutcome, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::Empty);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (na, nb) = (a.len(), b.len());
    let (ranks, ties) = midranks(a, b);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u_a = rank_sum_a - (na * (na + 1)) as f64 / 2.0;
    let u_b = (na * nb) as f64 - u_a;

    let (p, method) = if na <= EXACT_MAX_SIZE && nb <= EXACT_MAX_SIZE && ties.is_empty() {
        (exact_p_value(na, nb, u_a.round() as usize), TestMethod::Exact)
    } else {
        (normal_p_value(na, nb, u_a, &ties), TestMethod::NormalApproximation)
    };
    let p_value = p.clamp(0.0, 1.0);
    Ok(TestOutcome {
        statistic: u_a,
        u_other: u_b,
        p_value,
        method,
        significant_at_005: p_value < SIGNIFICANCE_LEVEL,
    })
}

/// Number of ways each U value arises when `na` of `na + nb` distinct ranks
/// go to the first sample. Index is U.
pub fn exact_u_distribution(na: usize, nb: usize) -> Vec<u64> {
    // counts[j][u]: subsets of size j of the ranks seen so far, by U
    // contribution. Adding rank r (0-based position) to a subset that already
    // has j members raises U by r - j.
    let max_u = na * nb;
    let mut counts = vec![vec![0u64; max_u + 1]; na + 1];
    counts[0][0] = 1;
    for r in 0..na + nb {
        for j in (0..na.min(r + 1)).rev() {
            let shift = r - j;
            for u in (0..=max_u - shift.min(max_u)).rev() {
                let c = counts[j][u];
                if c != 0 && u + shift <= max_u {
                    counts[j + 1][u + shift] += c;
                }
            }
        }
    }
    counts.swap_remove(na)
}

fn exact_p_value(na: usize, nb: usize, u: usize) -> f64 {
    let dist = exact_u_distribution(na, nb);
    let total: u64 = dist.iter().sum();
    let lower: u64 = dist[..=u].iter().sum();
    let upper: u64 = dist[u..].iter().sum();
    let tail = (2 * lower.min(upper)).min(total);
    tail as f64 / total as f64
}

fn normal_p_value(na: usize, nb: usize, u: f64, ties: &[usize]) -> f64 {
    let (na_f, nb_f) = (na as f64, nb as f64);
    let n = na_f + nb_f;
    let mean = na_f * nb_f / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = na_f * nb_f / 12.0 * ((n + 1.0) - tie_term);
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2)
}
