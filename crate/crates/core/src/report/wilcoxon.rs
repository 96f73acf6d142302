use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

pub const DEFAULT_EXACT_CUTOFF: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    /// Mann-Whitney U of the first sample.
    pub statistic: f64,
    pub p_value: f64,
    pub method: StatMethod,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatError {
    #[error("both samples must be non-empty")]
    EmptySample,
    #[error("samples must not contain NaN")]
    NotANumber,
}

/// Midranks of the pooled sample, doubled so that they stay integral.
fn doubled_midranks(pooled: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share (i+1 + j+1) / 2
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Two-sided Wilcoxon rank-sum test. The exact null distribution is used
/// when both samples have at most `exact_cutoff` values.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], exact_cutoff: usize) -> Result<StatResult, StatError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatError::EmptySample);
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(StatError::NotANumber);
    }
    let (n, m) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = doubled_midranks(&pooled);
    let w2: u64 = ranks[..n].iter().sum();
    let statistic = w2 as f64 / 2.0 - (n * (n + 1)) as f64 / 2.0;
    if n <= exact_cutoff && m <= exact_cutoff {
        Ok(StatResult {
            statistic,
            p_value: exact_p(&ranks, n, w2),
            method: StatMethod::Exact,
        })
    } else {
        Ok(StatResult {
            statistic,
            p_value: normal_p(n, m, w2, &ties),
            method: StatMethod::NormalApproximation,
        })
    }
}

/// Counts size-`n` subsets by doubled rank sum.
fn exact_p(ranks: &[u64], n: usize, w2: u64) -> f64 {
    let total: u64 = ranks.iter().sum();
    let max = total as usize;
    // dp[k][s]: subsets of size k with doubled sum s
    let mut dp = vec![vec![0f64; max + 1]; n + 1];
    dp[0][0] = 1.0;
    for &r in ranks {
        let r = r as usize;
        for k in (1..=n).rev() {
            for s in (r..=max).rev() {
                let add = dp[k - 1][s - r];
                if add != 0.0 {
                    dp[k][s] += add;
                }
            }
        }
    }
    let big_n = ranks.len() as i64;
    // null mean of the doubled sum
    let mean2 = n as i64 * (big_n + 1);
    let observed = (w2 as i64 - mean2).abs();
    let mut extreme = 0.0;
    let mut all = 0.0;
    for (s, &count) in dp[n].iter().enumerate() {
        all += count;
        if (s as i64 - mean2).abs() >= observed {
            extreme += count;
        }
    }
    (extreme / all).min(1.0)
}

fn normal_p(n: usize, m: usize, w2: u64, ties: &[usize]) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let big_n = nf + mf;
    let w = w2 as f64 / 2.0;
    let mean = nf * (big_n + 1.0) / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    let var = nf * mf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    (2.0 * normal.sf(z)).min(1.0)
}
