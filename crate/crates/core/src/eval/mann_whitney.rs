//! Two-sided Mann-Whitney U test with mid-ranks for ties.
//!
//! Small samples (`n_a + n_b <= 16`) get the exact permutation distribution of
//! the rank sum, computed by counting subsets over the actual (possibly tied)
//! ranks. Larger samples use the normal approximation with tie-corrected
//! variance and a 0.5 continuity correction.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest pooled size handled by exact enumeration.
pub const EXACT_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// `R_a - n_a (n_a + 1) / 2`.
    pub u_a: f64,
    pub u_b: f64,
    /// `min(u_a, u_b)`.
    pub u: f64,
    pub p_two_sided: f64,
    pub method: PMethod,
}

struct Ranked {
    /// Mid-ranks of the pooled sample, `a` first then `b`.
    ranks: Vec<f64>,
    /// Sizes of the tie groups.
    ties: Vec<usize>,
}

fn rank(a: &[f64], b: &[f64]) -> Result<Ranked> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("Mann-Whitney needs two nonempty samples".into()));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    if pooled.iter().any(|v| v.is_nan()) {
        return Err(Error::Argument("Mann-Whitney sample contains NaN".into()));
    }
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    Ok(Ranked { ranks, ties })
}

fn u_values(ranked: &Ranked, na: usize, nb: usize) -> (f64, f64) {
    let ra: f64 = ranked.ranks[..na].iter().sum();
    let u_a = ra - (na * (na + 1)) as f64 / 2.0;
    (u_a, (na * nb) as f64 - u_a)
}

/// Runs the test, choosing exact enumeration for small pooled samples.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let ranked = rank(a, b)?;
    let (u_a, u_b) = u_values(&ranked, a.len(), b.len());
    let (p, method) = if a.len() + b.len() <= EXACT_LIMIT {
        (exact_p_ranked(&ranked, a.len()), PMethod::Exact)
    } else {
        (normal_p_ranked(&ranked, a.len(), b.len()), PMethod::Normal)
    };
    Ok(MannWhitney {
        u_a,
        u_b,
        u: u_a.min(u_b),
        p_two_sided: p,
        method,
    })
}

/// Exact two-sided p: the share of all `C(n, n_a)` rank assignments whose
/// rank sum lies at least as far from its mean as the observed one.
pub fn exact_p(a: &[f64], b: &[f64]) -> Result<f64> {
    let ranked = rank(a, b)?;
    Ok(exact_p_ranked(&ranked, a.len()))
}

/// Normal-approximation two-sided p, whatever the sample sizes.
pub fn normal_p(a: &[f64], b: &[f64]) -> Result<f64> {
    let ranked = rank(a, b)?;
    Ok(normal_p_ranked(&ranked, a.len(), b.len()))
}

fn exact_p_ranked(ranked: &Ranked, na: usize) -> f64 {
    // Mid-ranks are multiples of 1/2, so doubled ranks are integers.
    let doubled: Vec<usize> = ranked.ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    // counts[k][s]: subsets of size k with doubled rank sum s
    let mut counts = vec![vec![0u128; total + 1]; na + 1];
    counts[0][0] = 1;
    for &r in &doubled {
        for k in (1..=na).rev() {
            for s in (r..=total).rev() {
                let add = counts[k - 1][s - r];
                if add > 0 {
                    counts[k][s] += add;
                }
            }
        }
    }
    let n = doubled.len() as f64;
    let mean2 = na as f64 * (n + 1.0); // doubled mean rank sum
    let observed: usize = doubled[..na].iter().sum();
    let dist = (observed as f64 - mean2).abs();
    let (mut extreme, mut all) = (0u128, 0u128);
    for (s, &c) in counts[na].iter().enumerate() {
        all += c;
        if (s as f64 - mean2).abs() >= dist - 1e-9 {
            extreme += c;
        }
    }
    (extreme as f64 / all as f64).min(1.0)
}

fn normal_p_ranked(ranked: &Ranked, na: usize, nb: usize) -> f64 {
    let (u_a, _) = u_values(ranked, na, nb);
    let (fa, fb) = (na as f64, nb as f64);
    let n = fa + fb;
    let mean = fa * fb / 2.0;
    let tie_sum: f64 = ranked.ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = if n > 1.0 {
        fa * fb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)))
    } else {
        0.0
    };
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u_a - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_triples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u_a, 0.0);
        assert_eq!(r.u_b, 9.0);
        assert_eq!(r.method, PMethod::Exact);
        assert!((r.p_two_sided - 0.1).abs() < 1e-15);
    }

    #[test]
    fn tied_singletons() {
        let r = mann_whitney_u(&[1.0], &[1.0]).unwrap();
        assert_eq!((r.u_a, r.u_b), (0.5, 0.5));
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(matches!(mann_whitney_u(&[], &[1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn large_samples_use_normal() {
        let a: Vec<f64> = (0..12).map(f64::from).collect();
        let b: Vec<f64> = (6..18).map(f64::from).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.method, PMethod::Normal);
        assert!(r.p_two_sided > 0.0 && r.p_two_sided < 1.0);
    }

    #[test]
    fn all_tied_normal_is_one() {
        assert_eq!(normal_p(&[2.0; 9], &[2.0; 9]).unwrap(), 1.0);
    }
}
