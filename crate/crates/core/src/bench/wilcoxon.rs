//! One-tailed Wilcoxon signed-rank test for paired samples, H1: a < b.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

/// Largest effective sample size handled by the exact distribution in
/// [`Method::Auto`].
pub const EXACT_MAX_N: usize = 25;

/// Minimum number of non-zero differences.
pub const MIN_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Normal,
    /// Exact up to [`EXACT_MAX_N`] pairs, normal beyond.
    Auto,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WilcoxonError {
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("insufficient data: {0} non-zero differences, at least {MIN_N} needed")]
    InsufficientData(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of positive differences `a - b`.
    pub statistic: f64,
    pub p_value: f64,
    pub n_effective: usize,
    pub method: Method,
}

/// Average ranks of `|d|`, ties sharing the mean rank.
fn ranks(abs: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..abs.len()).collect();
    idx.sort_by(|&i, &j| abs[i].total_cmp(&abs[j]));
    let mut r = vec![0.0; abs.len()];
    let mut ties = Vec::new();
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && abs[idx[e + 1]] == abs[idx[k]] {
            e += 1;
        }
        let mean = (k + e) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=e] {
            r[i] = mean;
        }
        ties.push(e - k + 1);
        k = e + 1;
    }
    (r, ties)
}

/// P(W+ ≤ w) under the null, counting all 2^n sign assignments. Ranks are
/// doubled so that tied half-ranks stay integral.
fn exact_lower_tail(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut count = vec![0.0f64; total + 1];
    count[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if count[s] != 0.0 {
                count[s + r] += count[s];
            }
        }
        reach += r;
    }
    let limit = (w * 2.0).round() as usize;
    let hits: f64 = count[..=limit.min(total)].iter().sum();
    hits / 2f64.powi(ranks.len() as i32)
}

fn normal_lower_tail(n: usize, ties: &[usize], w: f64) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w + 0.5 - mean) / var.sqrt();
    Normal::new(0.0, 1.0).expect("standard normal").cdf(z).clamp(0.0, 1.0)
}

/// Tests H0: the differences `a - b` are symmetric about zero, against
/// H1: `a` tends to be smaller. Zero differences are dropped.
pub fn wilcoxon_one_tailed(a: &[f64], b: &[f64], method: Method) -> Result<WilcoxonResult, WilcoxonError> {
    if a.len() != b.len() {
        return Err(WilcoxonError::LengthMismatch(a.len(), b.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n < MIN_N {
        return Err(WilcoxonError::InsufficientData(n));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (r, ties) = ranks(&abs);
    let statistic: f64 = diffs.iter().zip(&r).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let method = match method {
        Method::Auto if n <= EXACT_MAX_N => Method::Exact,
        Method::Auto => Method::Normal,
        m => m,
    };
    let p_value = match method {
        Method::Exact => exact_lower_tail(&r, statistic),
        _ => normal_lower_tail(n, &ties, statistic),
    };
    Ok(WilcoxonResult {
        statistic,
        p_value,
        n_effective: n,
        method,
    })
}
